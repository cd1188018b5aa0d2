use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::observation::{birth_death_sign_label, JumpLabel, JumpLabelMap, LabelTag};
use crate::rates::RateParams;
use crate::state::State;

const BIRTH: usize = 0;
const DEATH: usize = 1;

/// Birth-death process on the nonnegative integers with
/// constant birth and death rates, deaths gated by `x > 0`.
#[derive(Debug, Clone, Copy)]
pub struct BirthDeath {
    x0: i64,
}

impl BirthDeath {
    pub fn new(x0: i64) -> Result<Self> {
        if x0 < 0 {
            return Err(Error::Model(format!("birth-death start {x0} is negative")));
        }
        Ok(BirthDeath { x0 })
    }

    pub fn rates(&self, birth: f64, death: f64) -> Result<RateParams> {
        RateParams::new(&["birth", "death"], &[birth, death])
    }
}

impl GeneratorModel for BirthDeath {
    fn name(&self) -> &str {
        "birth_death"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn initial_state(&self) -> State {
        State::scalar(self.x0)
    }

    fn rate_names(&self) -> Vec<&'static str> {
        vec!["birth", "death"]
    }

    fn default_rates(&self) -> RateParams {
        self.rates(1.0, 1.0).expect("valid defaults")
    }

    fn is_valid(&self, x: &State) -> bool {
        x.dim() == 1 && x.get(0) >= 0
    }

    fn moves_out(&self, x: &State, out: &mut Vec<Move>) {
        out.push(Move {
            state: x.shifted(0, 1),
            rate: BIRTH,
            weight: 1.0,
        });
        if x.get(0) > 0 {
            out.push(Move {
                state: x.shifted(0, -1),
                rate: DEATH,
                weight: 1.0,
            });
        }
    }

    fn moves_in(&self, x: &State, out: &mut Vec<Move>) {
        if x.get(0) > 0 {
            out.push(Move {
                state: x.shifted(0, -1),
                rate: BIRTH,
                weight: 1.0,
            });
        }
        out.push(Move {
            state: x.shifted(0, 1),
            rate: DEATH,
            weight: 1.0,
        });
    }

    fn rate_bound(&self, rates: &RateParams) -> Result<f64> {
        Ok(rates.value(BIRTH) + rates.value(DEATH))
    }
}

impl JumpLabelMap for BirthDeath {
    fn label(&self, from: &State, to: &State) -> JumpLabel {
        if to.get(0) < 0 || from.get(0) < 0 {
            return JumpLabel::EMPTY;
        }
        birth_death_sign_label(from.get(0), to.get(0))
    }

    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>) {
        if label.tag != LabelTag::Sign {
            return;
        }
        let from = to.shifted(0, -label.payload);
        if label.payload.abs() == 1 && from.get(0) >= 0 {
            out.push(from);
        }
    }

    fn emitted_tags(&self) -> Vec<LabelTag> {
        vec![LabelTag::Sign]
    }
}

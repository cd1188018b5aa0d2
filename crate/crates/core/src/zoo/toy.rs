use crate::error::Result;
use crate::model::{GeneratorModel, Move};
use crate::observation::{JumpLabel, JumpLabelMap, LabelTag};
use crate::rates::RateParams;
use crate::state::State;

const ALPHA: usize = 0;
const DELTA: usize = 1;
const UNIT: usize = 2;

/// Three-state chain with generator
///
/// ```text
/// [ -a   a    0     ]
/// [  0  -1    1     ]
/// [  1   d  -(1+d)  ]
/// ```
///
/// on states 1, 2, 3, started in state 1. Jumps are labelled by their sign.
/// The two unit entries are carried by the fixed rate `unit`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyThreeState;

impl ToyThreeState {
    pub fn rates(&self, alpha: f64, delta: f64) -> Result<RateParams> {
        RateParams::new(&["alpha", "delta", "unit"], &[alpha, delta, 1.0])?.fix("unit")
    }
}

fn mv(x: i64, rate: usize) -> Move {
    Move {
        state: State::scalar(x),
        rate,
        weight: 1.0,
    }
}

impl GeneratorModel for ToyThreeState {
    fn name(&self) -> &str {
        "toy3"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn initial_state(&self) -> State {
        State::scalar(1)
    }

    fn rate_names(&self) -> Vec<&'static str> {
        vec!["alpha", "delta", "unit"]
    }

    fn default_rates(&self) -> RateParams {
        self.rates(2.0, 0.5).expect("valid defaults")
    }

    fn is_valid(&self, x: &State) -> bool {
        x.dim() == 1 && (1..=3).contains(&x.get(0))
    }

    fn moves_out(&self, x: &State, out: &mut Vec<Move>) {
        match x.get(0) {
            1 => out.push(mv(2, ALPHA)),
            2 => out.push(mv(3, UNIT)),
            3 => {
                out.push(mv(1, UNIT));
                out.push(mv(2, DELTA));
            }
            _ => {}
        }
    }

    fn moves_in(&self, x: &State, out: &mut Vec<Move>) {
        match x.get(0) {
            1 => out.push(mv(3, UNIT)),
            2 => {
                out.push(mv(1, ALPHA));
                out.push(mv(3, DELTA));
            }
            3 => out.push(mv(2, UNIT)),
            _ => {}
        }
    }

    fn rate_bound(&self, rates: &RateParams) -> Result<f64> {
        let u = rates.value(UNIT);
        Ok(rates.value(ALPHA).max(u).max(u + rates.value(DELTA)))
    }
}

impl JumpLabelMap for ToyThreeState {
    fn label(&self, from: &State, to: &State) -> JumpLabel {
        let (a, b) = (from.get(0), to.get(0));
        match (a, b) {
            (1, 2) | (2, 3) => JumpLabel::new(LabelTag::Sign, 1),
            (3, 1) | (3, 2) => JumpLabel::new(LabelTag::Sign, -1),
            _ => JumpLabel::EMPTY,
        }
    }

    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>) {
        if label.tag != LabelTag::Sign {
            return;
        }
        match (to.get(0), label.payload) {
            (2, 1) => out.push(State::scalar(1)),
            (3, 1) => out.push(State::scalar(2)),
            (1, -1) | (2, -1) => out.push(State::scalar(3)),
            _ => {}
        }
    }

    fn emitted_tags(&self) -> Vec<LabelTag> {
        vec![LabelTag::Sign]
    }
}

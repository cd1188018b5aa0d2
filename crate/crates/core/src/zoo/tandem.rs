use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::observation::{JumpLabel, JumpLabelMap, LabelTag};
use crate::rates::RateParams;
use crate::state::State;

const LAMBDA: usize = 0;
const MU1: usize = 1;
const MU2: usize = 2;

/// Two M/M/1 stations in series. State `(x1, x2)` counts tasks at each
/// station. Arrivals enter station 1, a service completion at station 1
/// moves one task to station 2 (both counts change at once), and station 2
/// completions leave the network.
///
/// Entries emit `(entry, x1 + 1)` and departures `(departure, x2 - 1)`:
/// the label carries the post-jump count of the station touched. Internal
/// transfers are never observable.
#[derive(Debug, Clone, Copy)]
pub struct TandemQueue {
    x0: State,
}

impl Default for TandemQueue {
    fn default() -> Self {
        TandemQueue {
            x0: State::new(&[0, 0]),
        }
    }
}

impl TandemQueue {
    pub fn with_initial(x1: i64, x2: i64) -> Result<Self> {
        if x1 < 0 || x2 < 0 {
            return Err(Error::Model(format!("negative queue length ({x1},{x2})")));
        }
        Ok(TandemQueue {
            x0: State::new(&[x1, x2]),
        })
    }

    /// Rates with `lambda` and `mu2` flagged as known constants.
    pub fn rates(&self, lambda: f64, mu1: f64, mu2: f64) -> Result<RateParams> {
        RateParams::new(&["lambda", "mu1", "mu2"], &[lambda, mu1, mu2])?
            .fix("lambda")?
            .fix("mu2")
    }
}

impl GeneratorModel for TandemQueue {
    fn name(&self) -> &str {
        "tandem"
    }

    fn dimension(&self) -> usize {
        2
    }

    fn initial_state(&self) -> State {
        self.x0
    }

    fn rate_names(&self) -> Vec<&'static str> {
        vec!["lambda", "mu1", "mu2"]
    }

    fn default_rates(&self) -> RateParams {
        self.rates(1.0, 2.0, 2.0).expect("valid defaults")
    }

    fn is_valid(&self, x: &State) -> bool {
        x.dim() == 2 && x.get(0) >= 0 && x.get(1) >= 0
    }

    fn moves_out(&self, x: &State, out: &mut Vec<Move>) {
        out.push(Move {
            state: x.shifted(0, 1),
            rate: LAMBDA,
            weight: 1.0,
        });
        if x.get(0) > 0 {
            out.push(Move {
                state: x.shifted(0, -1).shifted(1, 1),
                rate: MU1,
                weight: 1.0,
            });
        }
        if x.get(1) > 0 {
            out.push(Move {
                state: x.shifted(1, -1),
                rate: MU2,
                weight: 1.0,
            });
        }
    }

    fn moves_in(&self, x: &State, out: &mut Vec<Move>) {
        if x.get(0) > 0 {
            out.push(Move {
                state: x.shifted(0, -1),
                rate: LAMBDA,
                weight: 1.0,
            });
        }
        if x.get(1) > 0 {
            out.push(Move {
                state: x.shifted(0, 1).shifted(1, -1),
                rate: MU1,
                weight: 1.0,
            });
        }
        out.push(Move {
            state: x.shifted(1, 1),
            rate: MU2,
            weight: 1.0,
        });
    }

    fn rate_bound(&self, rates: &RateParams) -> Result<f64> {
        Ok(rates.value(LAMBDA) + rates.value(MU1) + rates.value(MU2))
    }
}

impl JumpLabelMap for TandemQueue {
    fn label(&self, from: &State, to: &State) -> JumpLabel {
        let d = (to.get(0) - from.get(0), to.get(1) - from.get(1));
        match d {
            (1, 0) => JumpLabel::new(LabelTag::Entry, to.get(0)),
            (0, -1) => JumpLabel::new(LabelTag::Departure, to.get(1)),
            _ => JumpLabel::EMPTY,
        }
    }

    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>) {
        match label.tag {
            LabelTag::Entry if to.get(0) == label.payload && to.get(0) > 0 => {
                out.push(to.shifted(0, -1))
            }
            LabelTag::Departure if to.get(1) == label.payload => out.push(to.shifted(1, 1)),
            LabelTag::Empty if to.get(1) > 0 => out.push(to.shifted(0, 1).shifted(1, -1)),
            _ => {}
        }
    }

    fn emitted_tags(&self) -> Vec<LabelTag> {
        vec![LabelTag::Entry, LabelTag::Departure]
    }
}

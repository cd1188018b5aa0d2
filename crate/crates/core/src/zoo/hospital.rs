use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::observation::{JumpLabel, JumpLabelMap, LabelTag};
use crate::rates::RateParams;
use crate::state::State;

const LAMBDA1: usize = 0;
const LAMBDA2: usize = 1;
const NU: usize = 2;
const MU: usize = 3;

const A: usize = 0;
const D: usize = 1;
const R: usize = 2;

/// Markov-modulated admissions with regime-dependent discharge capacity.
///
/// State `(a, d, r)`: cumulative admissions, cumulative discharges and the
/// regime `r` in {1, 2}. Admissions arrive at rate `lambda_r`, the regime
/// flips at rate `nu` in both directions, and each of the `a - d` patients
/// present is discharged at rate `mu`, with at most `L_r` served at once.
///
/// Labels: admissions emit `(admission, a + 1)`, regime flips
/// `(regime, r')` and discharges `(discharge, d + 1)`.
#[derive(Debug, Clone, Copy)]
pub struct HospitalMmpp {
    manpower: [u32; 2],
    x0: State,
}

impl HospitalMmpp {
    pub fn new(l1: u32, l2: u32) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::Model("manpower levels must be positive".into()));
        }
        Ok(HospitalMmpp {
            manpower: [l1, l2],
            x0: State::new(&[0, 0, 1]),
        })
    }

    pub fn with_initial(mut self, a: i64, d: i64, r: i64) -> Result<Self> {
        let x = State::new(&[a, d, r]);
        if !self.is_valid(&x) {
            return Err(Error::Model(format!("invalid initial hospital state {x}")));
        }
        self.x0 = x;
        Ok(self)
    }

    /// Rates with `nu` and `mu` flagged as known constants.
    pub fn rates(&self, lambda1: f64, lambda2: f64, nu: f64, mu: f64) -> Result<RateParams> {
        RateParams::new(
            &["lambda1", "lambda2", "nu", "mu"],
            &[lambda1, lambda2, nu, mu],
        )?
        .fix("nu")?
        .fix("mu")
    }

    pub fn manpower(&self, r: i64) -> i64 {
        self.manpower[(r - 1) as usize] as i64
    }

    fn busy(&self, x: &State) -> i64 {
        (x.get(A) - x.get(D)).min(self.manpower(x.get(R)))
    }
}

fn lambda_id(r: i64) -> usize {
    if r == 1 {
        LAMBDA1
    } else {
        LAMBDA2
    }
}

impl GeneratorModel for HospitalMmpp {
    fn name(&self) -> &str {
        "hospital_mmpp"
    }

    fn dimension(&self) -> usize {
        3
    }

    fn initial_state(&self) -> State {
        self.x0
    }

    fn rate_names(&self) -> Vec<&'static str> {
        vec!["lambda1", "lambda2", "nu", "mu"]
    }

    fn default_rates(&self) -> RateParams {
        self.rates(1.0, 2.0, 1.0 / 12.0, 0.5)
            .expect("valid defaults")
    }

    fn is_valid(&self, x: &State) -> bool {
        x.dim() == 3 && x.get(D) >= 0 && x.get(A) >= x.get(D) && (x.get(R) == 1 || x.get(R) == 2)
    }

    fn moves_out(&self, x: &State, out: &mut Vec<Move>) {
        let r = x.get(R);
        out.push(Move {
            state: x.shifted(A, 1),
            rate: lambda_id(r),
            weight: 1.0,
        });
        out.push(Move {
            state: x.with(R, 3 - r),
            rate: NU,
            weight: 1.0,
        });
        let busy = self.busy(x);
        if busy > 0 {
            out.push(Move {
                state: x.shifted(D, 1),
                rate: MU,
                weight: busy as f64,
            });
        }
    }

    fn moves_in(&self, x: &State, out: &mut Vec<Move>) {
        let r = x.get(R);
        if x.get(A) > x.get(D) {
            out.push(Move {
                state: x.shifted(A, -1),
                rate: lambda_id(r),
                weight: 1.0,
            });
        }
        out.push(Move {
            state: x.with(R, 3 - r),
            rate: NU,
            weight: 1.0,
        });
        if x.get(D) > 0 {
            let from = x.shifted(D, -1);
            out.push(Move {
                state: from,
                rate: MU,
                weight: self.busy(&from) as f64,
            });
        }
    }

    fn rate_bound(&self, rates: &RateParams) -> Result<f64> {
        let lmax = self.manpower[0].max(self.manpower[1]) as f64;
        Ok(rates.value(LAMBDA1).max(rates.value(LAMBDA2))
            + rates.value(NU)
            + rates.value(MU) * lmax)
    }
}

impl JumpLabelMap for HospitalMmpp {
    fn label(&self, from: &State, to: &State) -> JumpLabel {
        let (da, dd) = (to.get(A) - from.get(A), to.get(D) - from.get(D));
        let same_r = to.get(R) == from.get(R);
        match (da, dd, same_r) {
            (1, 0, true) => JumpLabel::new(LabelTag::Admission, to.get(A)),
            (0, 0, false) => JumpLabel::new(LabelTag::Regime, to.get(R)),
            (0, 1, true) if from.get(A) > from.get(D) => {
                JumpLabel::new(LabelTag::Discharge, to.get(D))
            }
            _ => JumpLabel::EMPTY,
        }
    }

    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>) {
        match label.tag {
            LabelTag::Admission if to.get(A) == label.payload && to.get(A) > to.get(D) => {
                out.push(to.shifted(A, -1))
            }
            LabelTag::Regime if to.get(R) == label.payload => out.push(to.with(R, 3 - to.get(R))),
            LabelTag::Discharge if to.get(D) == label.payload && to.get(D) > 0 => {
                out.push(to.shifted(D, -1))
            }
            _ => {}
        }
    }

    fn emitted_tags(&self) -> Vec<LabelTag> {
        vec![LabelTag::Admission, LabelTag::Regime, LabelTag::Discharge]
    }
}

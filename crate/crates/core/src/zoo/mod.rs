//! Concrete models: generator plus jump-label map.

mod birth_death;
mod finite;
mod hospital;
mod tandem;
mod toy;

pub use birth_death::BirthDeath;
pub use finite::FiniteChain;
pub use hospital::HospitalMmpp;
pub use tandem::TandemQueue;
pub use toy::ToyThreeState;

use crate::error::{Error, Result};
use crate::model::Model;

/// Names accepted by [`by_name`].
pub const MODEL_NAMES: [&str; 4] = ["toy3", "birth_death", "hospital_mmpp", "tandem"];

/// Model-specific constants that are not rates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelParams {
    pub initial_state: Option<Vec<i64>>,
    /// Manpower levels `(L1, L2)` of the hospital model.
    pub manpower: Option<(u32, u32)>,
}

pub fn by_name(name: &str, params: &ModelParams) -> Result<Box<dyn Model>> {
    let x0 = params.initial_state.as_deref();
    let check_dim = |d: usize| -> Result<()> {
        match x0 {
            Some(v) if v.len() != d => Err(Error::InvalidArgument(format!(
                "initial_state for `{name}` needs {d} coordinates, got {}",
                v.len()
            ))),
            _ => Ok(()),
        }
    };
    let model: Box<dyn Model> = match name {
        "toy3" => {
            check_dim(1)?;
            if x0.is_some_and(|v| v != [1]) {
                return Err(Error::InvalidArgument("toy3 starts in state 1".into()));
            }
            Box::new(ToyThreeState)
        }
        "birth_death" => {
            check_dim(1)?;
            Box::new(BirthDeath::new(x0.map_or(0, |v| v[0]))?)
        }
        "hospital_mmpp" => {
            check_dim(3)?;
            let (l1, l2) = params.manpower.unwrap_or((10, 3));
            let mut m = HospitalMmpp::new(l1, l2)?;
            if let Some(v) = x0 {
                m = m.with_initial(v[0], v[1], v[2])?;
            }
            Box::new(m)
        }
        "tandem" => {
            check_dim(2)?;
            let m = match x0 {
                Some(v) => TandemQueue::with_initial(v[0], v[1])?,
                None => TandemQueue::default(),
            };
            Box::new(m)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown model `{other}`; expected one of {MODEL_NAMES:?}"
            )))
        }
    };
    if params.manpower.is_some() && name != "hospital_mmpp" {
        return Err(Error::InvalidArgument(format!(
            "`manpower` does not apply to `{name}`"
        )));
    }
    Ok(model)
}

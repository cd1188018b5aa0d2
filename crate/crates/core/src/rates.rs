//! Named rate parameters and linear order constraints between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a rate inside a model's declared rate list.
pub type RateId = usize;

/// Named positive rates populating a generator. Rates flagged `fixed` are
/// treated as known constants by the inference routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    names: Vec<String>,
    values: Vec<f64>,
    fixed: Vec<bool>,
}

impl RateParams {
    pub fn new(names: &[&str], values: &[f64]) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rate names but {} values",
                names.len(),
                values.len()
            )));
        }
        let rp = RateParams {
            names: names.iter().map(|s| s.to_string()).collect(),
            values: values.to_vec(),
            fixed: vec![false; names.len()],
        };
        rp.validate()?;
        Ok(rp)
    }

    /// Marks the named rate as a known constant.
    pub fn fix(mut self, name: &str) -> Result<Self> {
        let id = self.require(name)?;
        self.fixed[id] = true;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, &v) in self.names.iter().zip(&self.values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "rate `{n}` must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn value(&self, id: RateId) -> f64 {
        self.values[id]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: RateId) -> &str {
        &self.names[id]
    }

    pub fn is_fixed(&self, id: RateId) -> bool {
        self.fixed[id]
    }

    pub fn free_ids(&self) -> impl Iterator<Item = RateId> + '_ {
        (0..self.len()).filter(|&i| !self.fixed[i])
    }

    pub fn index_of(&self, name: &str) -> Option<RateId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<RateId> {
        self.index_of(name)
            .ok_or_else(|| Error::InvalidArgument(format!("undeclared rate `{name}`")))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.values[i])
    }

    pub fn set(&mut self, id: RateId, value: f64) {
        self.values[id] = value;
    }

    pub fn set_by_name(&mut self, name: &str, value: f64) -> Result<()> {
        let id = self.require(name)?;
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate `{name}` must be finite and positive, got {value}"
            )));
        }
        self.values[id] = value;
        Ok(())
    }
}

/// A rate belonging to one cluster's parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamRef {
    pub cluster: usize,
    pub rate: RateId,
}

/// `factor * lower < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderConstraint {
    pub lower: ParamRef,
    pub upper: ParamRef,
    pub factor: f64,
}

impl OrderConstraint {
    pub fn holds(&self, sets: &[RateParams]) -> bool {
        let lo = sets[self.lower.cluster].value(self.lower.rate);
        let hi = sets[self.upper.cluster].value(self.upper.rate);
        self.factor * lo < hi
    }

    /// Parses `"[factor*]name[cluster] < [factor*]name[cluster]"`; clusters
    /// are 1-based. A side without a cluster index applies to every cluster,
    /// so `"1.25*lambda1 < lambda2"` expands to one constraint per cluster.
    /// A right-hand factor `f*upper` is folded in as `lower*factor/f`.
    pub fn parse(text: &str, names: &[String], clusters: usize) -> Result<Vec<OrderConstraint>> {
        let bad = |why: &str| Error::InvalidArgument(format!("constraint `{text}`: {why}"));
        let (lhs, rhs) = text.split_once('<').ok_or_else(|| bad("expected `<`"))?;
        let side = |s: &str| -> Result<(f64, RateId, Option<usize>)> {
            let s = s.trim();
            let (factor, rest) = match s.split_once('*') {
                Some((f, r)) => (
                    f.trim()
                        .parse::<f64>()
                        .map_err(|_| bad("factor is not a number"))?,
                    r.trim(),
                ),
                None => (1.0, s),
            };
            let (name, cluster) = match rest.split_once('[') {
                Some((n, c)) => {
                    let c = c
                        .strip_suffix(']')
                        .ok_or_else(|| bad("unclosed `[`"))?
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| bad("cluster index is not an integer"))?;
                    if c == 0 || c > clusters {
                        return Err(bad("cluster index out of range (1-based)"));
                    }
                    (n.trim(), Some(c - 1))
                }
                None => (rest, None),
            };
            let id = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| bad(&format!("unknown rate `{name}`")))?;
            if !(factor.is_finite() && factor > 0.0) {
                return Err(bad("factor must be positive"));
            }
            Ok((factor, id, cluster))
        };
        let (fl, il, cl) = side(lhs)?;
        let (fr, ir, cr) = side(rhs)?;
        let factor = fl / fr;
        let out = match (cl, cr) {
            (Some(a), Some(b)) => vec![(a, b)],
            (None, None) => (0..clusters).map(|c| (c, c)).collect(),
            _ => return Err(bad("either both or neither side must name a cluster")),
        };
        Ok(out
            .into_iter()
            .map(|(a, b)| OrderConstraint {
                lower: ParamRef {
                    cluster: a,
                    rate: il,
                },
                upper: ParamRef {
                    cluster: b,
                    rate: ir,
                },
                factor,
            })
            .collect())
    }
}

pub fn all_hold(constraints: &[OrderConstraint], sets: &[RateParams]) -> bool {
    constraints.iter().all(|c| c.holds(sets))
}

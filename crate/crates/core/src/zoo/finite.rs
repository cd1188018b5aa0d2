use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::observation::{JumpLabel, JumpLabelMap, LabelTag};
use crate::rates::RateParams;
use crate::state::State;

/// A small finite chain given by a dense generator matrix over states
/// `0..n`. Jumps are labelled by the sign of the index change unless a
/// label matrix is supplied. All entries hang off one fixed rate `scale = 1`.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    q: Vec<Vec<f64>>,
    labels: Option<Vec<Vec<JumpLabel>>>,
    x0: usize,
}

impl FiniteChain {
    pub fn new(q: Vec<Vec<f64>>, x0: usize) -> Result<Self> {
        let n = q.len();
        if n == 0 || x0 >= n || q.iter().any(|row| row.len() != n) {
            return Err(Error::Model(
                "finite chain needs a square non-empty matrix".into(),
            ));
        }
        for (i, row) in q.iter().enumerate() {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .sum();
            if row
                .iter()
                .enumerate()
                .any(|(j, &v)| j != i && !(v >= 0.0 && v.is_finite()))
            {
                return Err(Error::Model(format!(
                    "row {i} has a negative or non-finite rate"
                )));
            }
            if (off + row[i]).abs() > 1e-12 * off.max(1.0) {
                return Err(Error::Model(format!("row {i} does not sum to zero")));
            }
        }
        Ok(FiniteChain {
            q,
            labels: None,
            x0,
        })
    }

    /// Replaces the sign labelling. Diagonal and zero-rate entries are forced to ∅.
    pub fn with_labels(mut self, labels: Vec<Vec<JumpLabel>>) -> Result<Self> {
        let n = self.q.len();
        if labels.len() != n || labels.iter().any(|r| r.len() != n) {
            return Err(Error::Model("label matrix shape mismatch".into()));
        }
        let mut labels = labels;
        for i in 0..n {
            for j in 0..n {
                if i == j || self.q[i][j] <= 0.0 {
                    labels[i][j] = JumpLabel::EMPTY;
                }
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.q.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    fn index(&self, x: &State) -> Option<usize> {
        let i = x.get(0);
        (x.dim() == 1 && i >= 0 && (i as usize) < self.q.len()).then_some(i as usize)
    }
}

impl GeneratorModel for FiniteChain {
    fn name(&self) -> &str {
        "finite"
    }

    fn dimension(&self) -> usize {
        1
    }

    fn initial_state(&self) -> State {
        State::scalar(self.x0 as i64)
    }

    fn rate_names(&self) -> Vec<&'static str> {
        vec!["scale"]
    }

    fn default_rates(&self) -> RateParams {
        RateParams::new(&["scale"], &[1.0])
            .and_then(|r| r.fix("scale"))
            .expect("valid defaults")
    }

    fn is_valid(&self, x: &State) -> bool {
        self.index(x).is_some()
    }

    fn moves_out(&self, x: &State, out: &mut Vec<Move>) {
        let Some(i) = self.index(x) else { return };
        for (j, &w) in self.q[i].iter().enumerate() {
            if j != i && w > 0.0 {
                out.push(Move {
                    state: State::scalar(j as i64),
                    rate: 0,
                    weight: w,
                });
            }
        }
    }

    fn moves_in(&self, x: &State, out: &mut Vec<Move>) {
        let Some(j) = self.index(x) else { return };
        for i in 0..self.q.len() {
            let w = self.q[i][j];
            if i != j && w > 0.0 {
                out.push(Move {
                    state: State::scalar(i as i64),
                    rate: 0,
                    weight: w,
                });
            }
        }
    }

    fn rate_bound(&self, rates: &RateParams) -> Result<f64> {
        Ok(rates.value(0)
            * self
                .q
                .iter()
                .enumerate()
                .map(|(i, r)| -r[i])
                .fold(0.0, f64::max))
    }
}

impl JumpLabelMap for FiniteChain {
    fn label(&self, from: &State, to: &State) -> JumpLabel {
        let (Some(i), Some(j)) = (self.index(from), self.index(to)) else {
            return JumpLabel::EMPTY;
        };
        if i == j || self.q[i][j] <= 0.0 {
            return JumpLabel::EMPTY;
        }
        match &self.labels {
            Some(l) => l[i][j],
            None => JumpLabel::new(LabelTag::Sign, if j > i { 1 } else { -1 }),
        }
    }

    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>) {
        if self.index(to).is_none() {
            return;
        }
        for i in 0..self.q.len() {
            let x = State::scalar(i as i64);
            if x != *to && self.q[i][to.get(0) as usize] > 0.0 && self.label(&x, to) == label {
                out.push(x);
            }
        }
    }

    fn emitted_tags(&self) -> Vec<LabelTag> {
        let mut tags: Vec<LabelTag> = match &self.labels {
            Some(l) => l
                .iter()
                .flatten()
                .map(|l| l.tag)
                .filter(|t| *t != LabelTag::Empty)
                .collect(),
            None => vec![LabelTag::Sign],
        };
        tags.sort();
        tags.dedup();
        tags
    }
}

use crate::forest::{ArfEnsemble, Instance};

use super::importance::{ExplainMethod, ImportanceVector};
use super::ExplainError;

/// Largest feature count for which coalitions are enumerated exhaustively.
pub const MAX_EXACT_FEATURES: usize = 16;

/// A cooperative game over `n_players` features. Coalitions are bitmasks:
/// bit `j` set means feature `j` takes the explained instance's value.
pub trait CoalitionGame {
    fn n_players(&self) -> usize;
    fn value(&self, coalition: u32) -> f64;
}

/// Anything that yields a class-1 probability for a dense feature row.
pub trait ProbabilityModel {
    fn positive_proba(&self, row: &[f64]) -> f64;
}

impl ProbabilityModel for ArfEnsemble {
    fn positive_proba(&self, row: &[f64]) -> f64 {
        self.proba_positive_dense(row)
    }
}

/// Game given by an explicit table of coalition values.
#[derive(Debug, Clone)]
pub struct TableGame {
    n: usize,
    values: Vec<f64>,
}

impl TableGame {
    pub fn new(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), 1 << n, "need one value per coalition");
        Self { n, values }
    }
}

impl CoalitionGame for TableGame {
    fn n_players(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: u32) -> f64 {
        self.values[coalition as usize]
    }
}

/// Interventional coalition values of a probability model.
///
/// `f(S)` is the mean class-1 probability over background rows `b` of the
/// hybrid row that takes the target's values on `S` and `b`'s elsewhere.
pub struct CoalitionEvaluator<'a, M: ProbabilityModel + ?Sized> {
    model: &'a M,
    target: Vec<f64>,
    background: Vec<Vec<f64>>,
    /// Dense column of each player; `None` for features the model has
    /// never registered (and therefore never reads).
    columns: Vec<Option<usize>>,
}

impl<'a, M: ProbabilityModel + ?Sized> CoalitionEvaluator<'a, M> {
    pub fn new(
        model: &'a M,
        target: Vec<f64>,
        background: Vec<Vec<f64>>,
        columns: Vec<Option<usize>>,
    ) -> Result<Self, ExplainError> {
        if background.is_empty() {
            return Err(ExplainError::EmptyBackground);
        }
        let width = target.len();
        if background.iter().any(|b| b.len() != width)
            || columns.iter().flatten().any(|&c| c >= width)
        {
            return Err(ExplainError::RowShape);
        }
        Ok(Self {
            model,
            target,
            background,
            columns,
        })
    }

    pub fn model_output(&self) -> f64 {
        self.model.positive_proba(&self.target)
    }
}

impl<'a> CoalitionEvaluator<'a, ArfEnsemble> {
    /// Evaluator over the `active` features of `x`, in the given order.
    pub fn for_ensemble(
        ensemble: &'a ArfEnsemble,
        x: &Instance,
        background: &[Instance],
        active: &[String],
    ) -> Result<Self, ExplainError> {
        let reg = ensemble.registry();
        let columns = active.iter().map(|f| reg.index_of(f)).collect();
        let background = background.iter().map(|b| reg.dense(b)).collect();
        Self::new(ensemble, reg.dense(x), background, columns)
    }
}

impl<M: ProbabilityModel + ?Sized> CoalitionGame for CoalitionEvaluator<'_, M> {
    fn n_players(&self) -> usize {
        self.columns.len()
    }

    fn value(&self, coalition: u32) -> f64 {
        let mut row = vec![0.0; self.target.len()];
        let mut probs = Vec::with_capacity(self.background.len());
        for b in &self.background {
            row.copy_from_slice(b);
            for (j, col) in self.columns.iter().enumerate() {
                if let Some(c) = col {
                    if coalition & (1 << j) != 0 {
                        row[*c] = self.target[*c];
                    }
                }
            }
            probs.push(self.model.positive_proba(&row));
        }
        mean_exact(&probs)
    }
}

/// Arithmetic mean that returns the common value exactly when all inputs
/// are bitwise equal, so identical hybrid rows give identical coalition
/// values regardless of summation rounding.
fn mean_exact(xs: &[f64]) -> f64 {
    let first = xs[0];
    if xs.iter().all(|v| v.to_bits() == first.to_bits()) {
        return first;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Exact Shapley values by enumerating every coalition.
pub fn shapley<G: CoalitionGame + ?Sized>(game: &G) -> Result<Vec<f64>, ExplainError> {
    shapley_with_budget(game, MAX_EXACT_FEATURES)
}

pub fn shapley_with_budget<G: CoalitionGame + ?Sized>(
    game: &G,
    budget: usize,
) -> Result<Vec<f64>, ExplainError> {
    let d = game.n_players();
    let budget = budget.min(MAX_EXACT_FEATURES);
    if d > budget {
        return Err(ExplainError::FeatureBudget { features: d, budget });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let n_coalitions = 1usize << d;
    let values: Vec<f64> = (0..n_coalitions).map(|s| game.value(s as u32)).collect();
    let weights = coalition_weights(d);
    let mut phi = vec![0.0; d];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << j;
        let mut acc = 0.0;
        for s in (0..n_coalitions).filter(|s| s & bit == 0) {
            acc += weights[s.count_ones() as usize] * (values[s | bit] - values[s]);
        }
        *p = acc;
    }
    Ok(phi)
}

/// `|S|! (d - |S| - 1)! / d!` indexed by `|S|`.
fn coalition_weights(d: usize) -> Vec<f64> {
    let fact: Vec<f64> = (0..=d)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    (0..d).map(|s| fact[s] * fact[d - s - 1] / fact[d]).collect()
}

/// Absolute Shapley values normalized across features.
pub fn shap_importance<G: CoalitionGame + ?Sized>(
    game: &G,
    features: &[String],
    budget: usize,
) -> Result<ImportanceVector, ExplainError> {
    if features.len() != game.n_players() {
        return Err(ExplainError::RowShape);
    }
    let phi = shapley_with_budget(game, budget)?;
    let raw = phi.iter().map(|v| v.abs()).collect();
    Ok(ImportanceVector::from_raw(
        features.to_vec(),
        raw,
        ExplainMethod::Shap,
    ))
}

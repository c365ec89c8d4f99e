//! Train/test splitting, RMSE scoring and the k / mu sweep experiments.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::NaiveModel;
use crate::error::{Error, Result};
use crate::factorization::{train, train_ratings, FactorModel, Hyperparams, TrainTrace};
use crate::srn::{ItemId, RatingScale, RatingsTable, SocialGraph, SocialRatingNetwork, UserId};

/// Anything that can score a `(user, item)` cell. `None` means the cell is
/// outside what the predictor covers.
pub trait Predictor {
    fn score(&self, user: UserId, item: ItemId) -> Option<f64>;
}

impl Predictor for FactorModel {
    fn score(&self, user: UserId, item: ItemId) -> Option<f64> {
        self.predict(user, item).ok()
    }
}

impl Predictor for NaiveModel {
    fn score(&self, _user: UserId, item: ItemId) -> Option<f64> {
        self.predict(item).ok()
    }
}

impl<F> Predictor for F
where
    F: Fn(UserId, ItemId) -> Option<f64>,
{
    fn score(&self, user: UserId, item: ItemId) -> Option<f64> {
        self(user, item)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    train_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        Ok(Self {
            train_fraction,
            seed,
        })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Sends each observed entry to the training side with probability
/// `train_fraction`, independently, in entry order. Both sides keep the full
/// index space.
pub fn split(ratings: &RatingsTable, spec: &SplitSpec) -> (RatingsTable, RatingsTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = ratings.empty_like();
    let mut test = ratings.empty_like();
    for r in ratings.entries() {
        let side = if rng.random::<f64>() < spec.train_fraction {
            &mut train
        } else {
            &mut test
        };
        side.insert(r.user, r.item, r.value)
            .expect("entries of a valid table stay valid");
    }
    (train, test)
}

/// RMSE over the scored test entries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub rmse: f64,
    pub scored: usize,
    pub skipped: usize,
}

/// Root mean squared error of `predictor` over `test`. Predictions are
/// clipped into `clamp` when given. Cells the predictor does not cover are
/// counted as skipped and left out of the mean.
pub fn rmse<P: Predictor + ?Sized>(
    predictor: &P,
    test: &RatingsTable,
    clamp: Option<RatingScale>,
) -> Result<Score> {
    let mut sum = 0.0;
    let mut scored = 0;
    let mut skipped = 0;
    for r in test.entries() {
        match predictor.score(r.user, r.item) {
            Some(pred) => {
                let pred = clamp.map_or(pred, |s| s.clamp(pred));
                let e = r.value - pred;
                sum += e * e;
                scored += 1;
            }
            None => skipped += 1,
        }
    }
    if scored == 0 {
        return Err(Error::NoScorableEntries);
    }
    Ok(Score {
        rmse: (sum / scored as f64).sqrt(),
        scored,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    Naive,
    #[serde(rename = "NMF")]
    Nmf,
    #[serde(rename = "OA")]
    Oa,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naive => "Naive",
            Method::Nmf => "NMF",
            Method::Oa => "OA",
        })
    }
}

/// One row of an experiment report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub rmse: f64,
    pub scored: usize,
    pub skipped: usize,
}

impl EvalReport {
    pub fn naive(score: Score, k: Option<usize>) -> Self {
        Self {
            method: Method::Naive,
            k,
            lambda: None,
            mu: None,
            beta: None,
            iters: None,
            seed: None,
            rmse: score.rmse,
            scored: score.scored,
            skipped: score.skipped,
        }
    }

    pub fn factor(method: Method, hp: &Hyperparams, score: Score) -> Self {
        let mu = match method {
            Method::Nmf => 0.0,
            _ => hp.mu,
        };
        Self {
            method,
            k: Some(hp.k),
            lambda: Some(hp.lambda),
            mu: Some(mu),
            beta: Some(hp.beta),
            iters: Some(hp.max_iters),
            seed: Some(hp.seed),
            rmse: score.rmse,
            scored: score.scored,
            skipped: score.skipped,
        }
    }

    fn sort_key(&self) -> (Method, usize, f64) {
        (self.method, self.k.unwrap_or(0), self.mu.unwrap_or(0.0))
    }
}

/// Sorts by method, then k, then mu.
pub fn sort_reports(reports: &mut [EvalReport]) {
    reports.sort_by(|a, b| {
        let (ma, ka, ua) = a.sort_key();
        let (mb, kb, ub) = b.sort_key();
        ma.cmp(&mb).then(ka.cmp(&kb)).then(ua.total_cmp(&ub))
    });
}

/// Evaluation settings shared by every cell of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub split: SplitSpec,
    pub scale: RatingScale,
    /// Clip predictions into `scale` before scoring.
    pub clamp: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            scale: RatingScale::default(),
            clamp: true,
        }
    }
}

impl EvalSettings {
    fn clamp_scale(&self) -> Option<RatingScale> {
        self.clamp.then_some(self.scale)
    }
}

/// A network split into a training network (same ties, training ratings)
/// and held-out test ratings.
#[derive(Clone, Debug)]
pub struct Holdout {
    pub train: SocialRatingNetwork,
    pub test: RatingsTable,
}

impl Holdout {
    pub fn new(srn: &SocialRatingNetwork, spec: &SplitSpec) -> Result<Self> {
        let (train_ratings, test) = split(srn.ratings(), spec);
        Ok(Self {
            train: srn.with_ratings(train_ratings)?,
            test,
        })
    }

    pub fn naive(&self, settings: &EvalSettings) -> Result<Score> {
        let model = NaiveModel::fit(self.train.ratings()).with_scale(settings.scale);
        rmse(&model, &self.test, settings.clamp_scale())
    }

    /// Trains one factor method on the training side and scores it on the
    /// test side. `Method::Nmf` ignores the ties; `Method::Oa` uses them.
    pub fn factor(
        &self,
        method: Method,
        hp: &Hyperparams,
        settings: &EvalSettings,
    ) -> Result<(Score, FactorModel, TrainTrace)> {
        let (model, trace) = match method {
            Method::Nmf => train_ratings(self.train.ratings(), hp)?,
            Method::Oa => train(&self.train, hp)?,
            Method::Naive => {
                return Err(Error::InvalidParam("naive is not a factor method".into()))
            }
        };
        let score = rmse(&model, &self.test, settings.clamp_scale())?;
        Ok((score, model, trace))
    }
}

/// For each `k`: NMF, OA (with `hp.mu`) and Naive on one shared split.
/// Rows come back sorted by method then k.
pub fn sweep_k(
    srn: &SocialRatingNetwork,
    k_values: &[usize],
    hp: &Hyperparams,
    settings: &EvalSettings,
) -> Result<Vec<EvalReport>> {
    if k_values.is_empty() {
        return Err(Error::InvalidParam("k sweep needs at least one k".into()));
    }
    let holdout = Holdout::new(srn, &settings.split)?;
    let naive = holdout.naive(settings)?;

    let cells: Vec<(Method, usize)> = k_values
        .iter()
        .flat_map(|&k| [(Method::Nmf, k), (Method::Oa, k)])
        .collect();
    let mut reports = cells
        .par_iter()
        .map(|&(method, k)| {
            let hp = Hyperparams { k, ..hp.clone() };
            let (score, _, _) = holdout.factor(method, &hp, settings)?;
            Ok(EvalReport::factor(method, &hp, score))
        })
        .collect::<Result<Vec<_>>>()?;
    reports.extend(k_values.iter().map(|&k| EvalReport::naive(naive, Some(k))));
    sort_reports(&mut reports);
    Ok(reports)
}

/// OA at fixed `hp.k` for each `mu`, on one shared split. Rows sorted by mu.
pub fn sweep_mu(
    srn: &SocialRatingNetwork,
    mu_values: &[f64],
    hp: &Hyperparams,
    settings: &EvalSettings,
) -> Result<Vec<EvalReport>> {
    if mu_values.is_empty() {
        return Err(Error::InvalidParam("mu sweep needs at least one mu".into()));
    }
    let holdout = Holdout::new(srn, &settings.split)?;
    let mut reports = mu_values
        .par_iter()
        .map(|&mu| {
            let hp = Hyperparams { mu, ..hp.clone() };
            let (score, _, _) = holdout.factor(Method::Oa, &hp, settings)?;
            Ok(EvalReport::factor(Method::Oa, &hp, score))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_reports(&mut reports);
    Ok(reports)
}

/// Mean Euclidean distance between the user vectors of tied pairs, or `None`
/// without ties.
pub fn mean_tie_distance(model: &FactorModel, social: &SocialGraph) -> Option<f64> {
    if social.is_empty() {
        return None;
    }
    let p = model.p();
    let total: f64 = social
        .edges()
        .iter()
        .map(|&(x, y)| {
            let d = &p.row(x.0) - &p.row(y.0);
            d.dot(&d).sqrt()
        })
        .sum();
    Some(total / social.edge_count() as f64)
}

pub fn reports_to_json(reports: &[EvalReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

pub fn reports_from_json(text: &str) -> Result<Vec<EvalReport>> {
    Ok(serde_json::from_str(text)?)
}

/// Aligned text table: one row per k, one RMSE column per method.
pub fn k_table(reports: &[EvalReport]) -> String {
    let methods: BTreeSet<Method> = reports.iter().map(|r| r.method).collect();
    let ks: BTreeSet<usize> = reports.iter().filter_map(|r| r.k).collect();
    let mut out = String::new();
    let _ = write!(out, "{:>6}", "k");
    for m in &methods {
        let _ = write!(out, " {:>10}", m.to_string());
    }
    out.push('\n');
    for k in ks {
        let _ = write!(out, "{k:>6}");
        for &m in &methods {
            match reports.iter().find(|r| r.method == m && r.k == Some(k)) {
                Some(r) => {
                    let _ = write!(out, " {:>10.4}", r.rmse);
                }
                None => {
                    let _ = write!(out, " {:>10}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Aligned text table: one row per mu, largest first.
pub fn mu_table(reports: &[EvalReport]) -> String {
    let mut rows: Vec<&EvalReport> = reports.iter().filter(|r| r.mu.is_some()).collect();
    rows.sort_by(|a, b| b.mu.unwrap_or(0.0).total_cmp(&a.mu.unwrap_or(0.0)));
    let mut out = format!("{:>10} {:>10}\n", "mu", "RMSE");
    for r in rows {
        let _ = writeln!(out, "{:>10.0e} {:>10.4}", r.mu.unwrap_or(0.0), r.rmse);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> RatingsTable {
        RatingsTable::from_entries(n, 1, (0..n).map(|u| (u, 0, (u % 5) as f64 + 1.0))).unwrap()
    }

    #[test]
    fn split_partitions_entries() {
        let t = table(10);
        for seed in 0..20 {
            let (train, test) = split(&t, &SplitSpec::new(0.999, seed).unwrap());
            assert_eq!(train.len() + test.len(), 10);
            for r in t.entries() {
                assert!(train.is_observed(r.user, r.item) ^ test.is_observed(r.user, r.item));
            }
            assert_eq!(train.n_users(), 10);
            assert_eq!(test.n_items(), 1);
        }
    }

    #[test]
    fn split_is_deterministic() {
        let t = table(50);
        let spec = SplitSpec::new(0.5, 3).unwrap();
        assert_eq!(split(&t, &spec), split(&t, &spec));
    }

    #[test]
    fn split_fraction_validated() {
        assert!(SplitSpec::new(0.0, 0).is_err());
        assert!(SplitSpec::new(1.0, 0).is_err());
        assert!(SplitSpec::new(f64::NAN, 0).is_err());
    }

    #[test]
    fn perfect_predictor_scores_zero() {
        let t = table(7);
        let truth = t.clone();
        let s = rmse(&|u, i| truth.get(u, i), &t, None).unwrap();
        assert_eq!(s.rmse, 0.0);
        assert_eq!(s.scored, 7);
    }

    #[test]
    fn constant_zero_against_three() {
        let t = RatingsTable::from_entries(1, 1, [(0, 0, 3.0)]).unwrap();
        let s = rmse(&|_, _| Some(0.0), &t, None).unwrap();
        assert_eq!(s.rmse, 3.0);
        let clamped = rmse(&|_, _| Some(0.0), &t, Some(RatingScale::default())).unwrap();
        assert_eq!(clamped.rmse, 2.0);
    }

    #[test]
    fn uncovered_cells_are_skipped() {
        let t = table(4);
        let s = rmse(&|u: UserId, _| (u.0 < 2).then_some(3.0), &t, None).unwrap();
        assert_eq!(s.scored, 2);
        assert_eq!(s.skipped, 2);
        assert!(matches!(
            rmse(&|_, _| None, &t, None),
            Err(Error::NoScorableEntries)
        ));
    }

    #[test]
    fn reports_sort_canonically() {
        let s = Score {
            rmse: 1.0,
            scored: 1,
            skipped: 0,
        };
        let hp = Hyperparams::default();
        let mut rows = vec![
            EvalReport::factor(Method::Oa, &Hyperparams { k: 2, ..hp.clone() }, s),
            EvalReport::naive(s, Some(4)),
            EvalReport::factor(Method::Nmf, &hp, s),
            EvalReport::naive(s, Some(2)),
        ];
        sort_reports(&mut rows);
        let order: Vec<_> = rows.iter().map(|r| (r.method, r.k)).collect();
        assert_eq!(
            order,
            vec![
                (Method::Naive, Some(2)),
                (Method::Naive, Some(4)),
                (Method::Nmf, Some(10)),
                (Method::Oa, Some(2)),
            ]
        );
    }

    #[test]
    fn json_has_report_fields() {
        let s = Score {
            rmse: 0.5,
            scored: 3,
            skipped: 1,
        };
        let rows = vec![
            EvalReport::factor(Method::Nmf, &Hyperparams::default(), s),
            EvalReport::naive(s, Some(10)),
        ];
        let json = reports_to_json(&rows).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let obj = v[0].as_object().unwrap();
        for key in [
            "method", "k", "lambda", "mu", "beta", "iters", "seed", "rmse", "scored", "skipped",
        ] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        assert_eq!(v[0]["method"], "NMF");
        assert_eq!(v[0]["mu"], 0.0);
        assert_eq!(v[1]["method"], "Naive");
        assert_eq!(reports_from_json(&json).unwrap(), rows);
    }

    #[test]
    fn tables_render_every_row() {
        let s = Score {
            rmse: 0.75,
            scored: 1,
            skipped: 0,
        };
        let hp = Hyperparams::default();
        let rows: Vec<_> = [2, 4]
            .iter()
            .flat_map(|&k| {
                let hp = Hyperparams { k, ..hp.clone() };
                [
                    EvalReport::naive(s, Some(k)),
                    EvalReport::factor(Method::Nmf, &hp, s),
                    EvalReport::factor(Method::Oa, &hp, s),
                ]
            })
            .collect();
        let text = k_table(&rows);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().next().unwrap().contains("Naive"));
        assert!(text.contains("0.7500"));

        let mu_rows: Vec<_> = [1e-1, 1e-3]
            .iter()
            .map(|&mu| EvalReport::factor(Method::Oa, &Hyperparams { mu, ..hp.clone() }, s))
            .collect();
        let text = mu_table(&mu_rows);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().contains("1e-1"));
    }

    #[test]
    fn tie_distance() {
        let model = FactorModel::from_factors(
            ndarray::array![[0.0, 0.0], [3.0, 4.0], [0.0, 1.0]],
            ndarray::Array2::zeros((0, 2)),
        )
        .unwrap();
        let g = SocialGraph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(mean_tie_distance(&model, &g), Some(3.0));
        assert_eq!(mean_tie_distance(&model, &SocialGraph::new(3)), None);
    }
}

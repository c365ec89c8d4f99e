use std::io::{BufRead, Write};

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factorization::Hyperparams;
use crate::srn::{ItemId, UserId};

const MODEL_MAGIC: &str = "socmf-model";
const MODEL_VERSION: &str = "v1";

/// Latent factors: row `x` of `p` is the user vector, row `j` of `q` the
/// item vector. Predictions are inner products of the two.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorModel {
    p: Array2<f64>,
    q: Array2<f64>,
}

impl FactorModel {
    pub fn zeros(n_users: usize, n_items: usize, k: usize) -> Self {
        Self {
            p: Array2::zeros((n_users, k)),
            q: Array2::zeros((n_items, k)),
        }
    }

    pub fn from_factors(p: Array2<f64>, q: Array2<f64>) -> Result<Self> {
        if p.ncols() != q.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "user factors have {} columns, item factors {}",
                p.ncols(),
                q.ncols()
            )));
        }
        Ok(Self { p, q })
    }

    /// Random model with entries i.i.d. uniform on `[0, init_scale)`, drawn
    /// from `hp.seed`. User rows are drawn first, then item rows.
    pub fn init(n_users: usize, n_items: usize, hp: &Hyperparams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let scale = hp.init_scale;
        let p = Array2::from_shape_simple_fn((n_users, hp.k), || rng.random::<f64>() * scale);
        let q = Array2::from_shape_simple_fn((n_items, hp.k), || rng.random::<f64>() * scale);
        Self { p, q }
    }

    pub fn k(&self) -> usize {
        self.p.ncols()
    }

    pub fn n_users(&self) -> usize {
        self.p.nrows()
    }

    pub fn n_items(&self) -> usize {
        self.q.nrows()
    }

    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    pub fn q(&self) -> &Array2<f64> {
        &self.q
    }

    pub(crate) fn factors_mut(&mut self) -> (&mut Array2<f64>, &mut Array2<f64>) {
        (&mut self.p, &mut self.q)
    }

    pub fn user_vector(&self, x: UserId) -> Result<ArrayView1<'_, f64>> {
        self.check_user(x)?;
        Ok(self.p.row(x.0))
    }

    pub fn item_vector(&self, j: ItemId) -> Result<ArrayView1<'_, f64>> {
        self.check_item(j)?;
        Ok(self.q.row(j.0))
    }

    /// Raw inner product `p_x . q_j`, unclamped.
    pub fn predict(&self, x: UserId, j: ItemId) -> Result<f64> {
        self.check_user(x)?;
        self.check_item(j)?;
        Ok(self.p.row(x.0).dot(&self.q.row(j.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(self.q.iter()).all(|v| v.is_finite())
    }

    /// Writes the text model format: a `socmf-model v1 <n_u> <n_i> <k>`
    /// header, then one line of `k` reals per user row and per item row.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{MODEL_MAGIC} {MODEL_VERSION} {} {} {}",
            self.n_users(),
            self.n_items(),
            self.k()
        )?;
        for row in self.p.rows().into_iter().chain(self.q.rows()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: "<model>".into(),
            line,
            message,
        };
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| bad(1, "missing header".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 || fields[0] != MODEL_MAGIC || fields[1] != MODEL_VERSION {
            return Err(bad(1, format!("bad header {header:?}")));
        }
        let dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| bad(1, format!("bad dimension {s:?}: {e}")))
        };
        let (n_users, n_items, k) = (dim(fields[2])?, dim(fields[3])?, dim(fields[4])?);

        let mut values = Vec::with_capacity((n_users + n_items) * k);
        for row in 0..n_users + n_items {
            let lineno = row + 2;
            let line = lines
                .next()
                .ok_or_else(|| bad(lineno, "unexpected end of file".into()))??;
            let before = values.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| bad(lineno, format!("bad value {tok:?}: {e}")))?;
                values.push(v);
            }
            if values.len() - before != k {
                return Err(bad(
                    lineno,
                    format!("expected {k} values, found {}", values.len() - before),
                ));
            }
        }
        if let Some(extra) = lines.next() {
            if !extra?.trim().is_empty() {
                return Err(bad(n_users + n_items + 2, "trailing data".into()));
            }
        }
        let q_values = values.split_off(n_users * k);
        let p = Array2::from_shape_vec((n_users, k), values)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let q = Array2::from_shape_vec((n_items, k), q_values)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Ok(Self { p, q })
    }

    fn check_user(&self, x: UserId) -> Result<()> {
        if x.0 >= self.n_users() {
            return Err(Error::IndexOutOfRange {
                kind: "user",
                index: x.0,
                count: self.n_users(),
            });
        }
        Ok(())
    }

    fn check_item(&self, j: ItemId) -> Result<()> {
        if j.0 >= self.n_items() {
            return Err(Error::IndexOutOfRange {
                kind: "item",
                index: j.0,
                count: self.n_items(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn hp(seed: u64, init_scale: f64) -> Hyperparams {
        Hyperparams {
            k: 3,
            seed,
            init_scale,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn init_is_deterministic() {
        let a = FactorModel::init(4, 5, &hp(7, 0.1));
        let b = FactorModel::init(4, 5, &hp(7, 0.1));
        assert_eq!(a, b);
        assert!(a
            .p()
            .iter()
            .chain(a.q().iter())
            .all(|&v| (0.0..0.1).contains(&v)));
    }

    #[test]
    fn zero_init_scale_gives_zero_model() {
        let m = FactorModel::init(3, 2, &hp(1, 0.0));
        assert_eq!(m, FactorModel::zeros(3, 2, 3));
    }

    #[test]
    fn different_seeds_differ() {
        // seeds 1 and 2 pinned after observing that they differ
        let a = FactorModel::init(3, 3, &hp(1, 0.1));
        let b = FactorModel::init(3, 3, &hp(2, 0.1));
        assert_ne!(a, b);
    }

    #[test]
    fn predict_is_inner_product() {
        let m =
            FactorModel::from_factors(array![[0.5, 0.7, 0.0, 0.0]], array![[1.0, 1.0, 1.0, 1.0]])
                .unwrap();
        assert!((m.predict(UserId(0), ItemId(0)).unwrap() - 1.2).abs() < 1e-15);

        let m = FactorModel::from_factors(array![[2.0]], array![[3.0]]).unwrap();
        assert_eq!(m.predict(UserId(0), ItemId(0)).unwrap(), 6.0);

        let m =
            FactorModel::from_factors(array![[0.0, 0.0]], array![[1.0, 2.0], [-3.0, 4.0]]).unwrap();
        assert_eq!(m.predict(UserId(0), ItemId(0)).unwrap(), 0.0);
        assert_eq!(m.predict(UserId(0), ItemId(1)).unwrap(), 0.0);
    }

    #[test]
    fn predict_out_of_range() {
        let m = FactorModel::zeros(2, 2, 1);
        assert!(matches!(
            m.predict(UserId(2), ItemId(0)),
            Err(Error::IndexOutOfRange { kind: "user", .. })
        ));
        assert!(matches!(
            m.predict(UserId(0), ItemId(9)),
            Err(Error::IndexOutOfRange { kind: "item", .. })
        ));
    }

    #[test]
    fn mismatched_factors_rejected() {
        assert!(FactorModel::from_factors(Array2::zeros((2, 3)), Array2::zeros((2, 2))).is_err());
    }

    #[test]
    fn text_format_roundtrip_is_exact() {
        let m = FactorModel::init(3, 4, &hp(11, 1.0));
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("socmf-model v1 3 4 3\n"));
        assert_eq!(text.lines().count(), 1 + 3 + 4);
        let back = FactorModel::read_from(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn malformed_model_rejected() {
        assert!(FactorModel::read_from(&b"socmf-model v2 1 1 1\n0.5\n0.5\n"[..]).is_err());
        assert!(FactorModel::read_from(&b"socmf-model v1 1 1 2\n0.5\n0.5 1\n"[..]).is_err());
        assert!(FactorModel::read_from(&b"socmf-model v1 1 1 1\n0.5\n"[..]).is_err());
        assert!(FactorModel::read_from(&b"socmf-model v1 1 1 1\nx\n1\n"[..]).is_err());
    }
}

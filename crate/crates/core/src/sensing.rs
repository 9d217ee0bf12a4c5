//! Measurement matrices and exact group-RIP certification.
//!
//! Certification is brute force: for every member `Λ` of the group k-sparse
//! family the extreme eigenvalues of the Gram matrix `A_Λᵀ A_Λ` are computed
//! with a dense symmetric eigensolver, and the min/max over members gives
//! `ρ̲_k` and `ρ̄_k`. With the all-singleton partition this is the classical
//! RIP of that order.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{check_dim, invalid, Error, Result};
use crate::groups::{enumerate_gks, GksFamily, GroupPartition, Support};
use crate::norms::{fill_on, l2, sample_disjoint_pair};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Gaussian { seed: u64 },
    Bernoulli { seed: u64 },
    Loaded { path: String },
    Explicit,
}

/// A dense `m × n` real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    a: DMatrix<f64>,
    provenance: Provenance,
}

impl MeasurementMatrix {
    pub fn new(a: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(invalid("measurement matrix must have at least one row and column"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(invalid("measurement matrix has non-finite entries"));
        }
        Ok(Self { a, provenance })
    }

    pub fn from_matrix(a: DMatrix<f64>) -> Result<Self> {
        Self::new(a, Provenance::Explicit)
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n), Provenance::Explicit).expect("identity is valid")
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols());
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, aij) in out.iter_mut().zip(self.a.column(j).iter()) {
                *o += aij * xj;
            }
        }
        out
    }

    /// `Aᵀ y`
    pub fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows());
        (0..self.cols())
            .map(|j| self.a.column(j).iter().zip(y).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Columns indexed by `support`, in order.
    pub fn columns(&self, support: &Support) -> DMatrix<f64> {
        self.a.select_columns(support.indices())
    }

    /// Writes `m n` on the first line, then `m` rows of `n` reals in shortest
    /// round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{}", self.a[(i, j)]).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (l0, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix file".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: l0 + 1,
                message: format!("bad header: {e}"),
            })?;
        let [m, n] = dims[..] else {
            return Err(Error::Parse {
                line: l0 + 1,
                message: "header must be `m n`".into(),
            });
        };
        let mut a = DMatrix::zeros(m, n);
        for i in 0..m {
            let (li, line) = lines.next().ok_or(Error::Parse {
                line: l0 + 2 + i,
                message: format!("expected {m} rows, found {i}"),
            })?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: li + 1,
                    message: format!("bad entry: {e}"),
                })?;
            if row.len() != n {
                return Err(Error::Parse {
                    line: li + 1,
                    message: format!("expected {n} entries, found {}", row.len()),
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        Self::new(a, Provenance::Explicit)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut m = Self::parse(&std::fs::read_to_string(path)?)?;
        m.provenance = Provenance::Loaded {
            path: path.display().to_string(),
        };
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Largest singular value by power iteration on `AᵀA`.
    pub fn operator_norm(&self, iters: usize, tol: f64) -> f64 {
        let n = self.cols();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut sigma = 0.0;
        for _ in 0..iters {
            let w = self.apply_t(&self.apply(&v));
            let norm = l2(&w);
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm.sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - sigma).abs() <= tol * next {
                sigma = next;
                break;
            }
            sigma = next;
        }
        sigma
    }
}

/// i.i.d. `N(0, 1/m)` entries, deterministic in `seed`.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return Err(invalid("m and n must be at least 1"));
    }
    let mut r = rng::stream(seed, 0);
    let normal = Normal::new(0.0, 1.0 / (m as f64).sqrt()).expect("valid std dev");
    let a = DMatrix::from_fn(m, n, |_, _| 0.0);
    let mut a = a;
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = normal.sample(&mut r);
        }
    }
    MeasurementMatrix::new(a, Provenance::Gaussian { seed })
}

/// i.i.d. `±1/√m` entries with equal probability, deterministic in `seed`.
pub fn gen_bernoulli(m: usize, n: usize, seed: u64) -> Result<MeasurementMatrix> {
    if m == 0 || n == 0 {
        return Err(invalid("m and n must be at least 1"));
    }
    let mut r = rng::stream(seed, 0);
    let s = 1.0 / (m as f64).sqrt();
    let mut a = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = if r.random::<bool>() { s } else { -s };
        }
    }
    MeasurementMatrix::new(a, Provenance::Bernoulli { seed })
}

/// Certified group-RIP constants of one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GripCertificate {
    pub order: usize,
    pub rho_low: f64,
    pub rho_high: f64,
    pub delta: f64,
    pub family_size: usize,
    pub partition_hash: String,
}

impl GripCertificate {
    /// False when some support has a singular column submatrix.
    pub fn injective(&self) -> bool {
        self.rho_low > 0.0
    }

    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        format!(
            "order = {}\nrho_low = {}\nrho_high = {}\ndelta = {}\nfamily_size = {}\npartition_hash = {}\ninjective = {}\n",
            self.order,
            self.rho_low,
            self.rho_high,
            self.delta,
            self.family_size,
            self.partition_hash,
            self.injective()
        )
    }
}

/// Smallest and largest eigenvalue of `A_Λᵀ A_Λ`.
pub fn gram_extremes(a: &MeasurementMatrix, support: &Support) -> (f64, f64) {
    let cols = a.columns(support);
    if cols.ncols() == 1 {
        let v = cols.norm_squared();
        return (v, v);
    }
    let gram = cols.transpose() * &cols;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    (eig.min(), eig.max())
}

/// Certifies the group RIP of `order` over the partition's GkS family.
pub fn certify_grip(a: &MeasurementMatrix, partition: &GroupPartition, order: usize) -> Result<GripCertificate> {
    check_dim(partition.n(), a.cols(), "certify_grip")?;
    let family = enumerate_gks(partition, order)?;
    certify_family(a, &family)
}

/// Certifies over an already enumerated family.
pub fn certify_family(a: &MeasurementMatrix, family: &GksFamily) -> Result<GripCertificate> {
    check_dim(family.n(), a.cols(), "certify_grip")?;
    if family.is_empty() {
        return Err(invalid("cannot certify over an empty family"));
    }
    let extremes = par::map_slice(family.sets(), |s| gram_extremes(a, s));
    let rho_low = extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let rho_high = extremes.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(GripCertificate {
        order: family.k(),
        rho_low,
        rho_high,
        delta: (rho_high - rho_low) / 2.0,
        family_size: family.len(),
        partition_hash: family.partition().hash_hex(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossLemmaReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest `|<Au, Av>| / (||u||₂ ||v||₂)` seen; never above `δ_2k` when the lemma holds.
    pub worst_ratio: f64,
    pub delta_2k: f64,
}

/// Absolute slack allowed on `|<Au, Av>| ≤ δ_2k ||u|| ||v||`.
pub const CROSS_LEMMA_TOL: f64 = 1e-12;

/// Samples pairs `u, v` on disjoint members of GkS (order `k`) and checks
/// `|<Au, Av>| ≤ δ_2k ||u||₂ ||v||₂ + 1e-12` against the order-`2k` certificate.
pub fn check_cross_lemma(
    a: &MeasurementMatrix,
    partition: &GroupPartition,
    k: usize,
    cert_2k: &GripCertificate,
    trials: usize,
    seed: u64,
) -> Result<CrossLemmaReport> {
    if cert_2k.order != 2 * k {
        return Err(invalid(format!(
            "certificate has order {}, expected {}",
            cert_2k.order,
            2 * k
        )));
    }
    if cert_2k.partition_hash != partition.hash_hex() {
        return Err(invalid("certificate was issued for a different partition"));
    }
    check_dim(partition.n(), a.cols(), "check_cross_lemma")?;
    let family = enumerate_gks(partition, k)?;
    if !family.has_disjoint_pair() {
        return Err(Error::NotTestable("family has no two disjoint members".into()));
    }
    let n = family.n();
    let delta = cert_2k.delta;
    let results = par::map_range(trials, |t| {
        let mut r = rng::stream(seed, t as u64);
        let (su, sv) = sample_disjoint_pair(&family, &mut r);
        let u = fill_on(su, n, false, &mut r);
        let v = fill_on(sv, n, false, &mut r);
        let (au, av) = (a.apply(&u), a.apply(&v));
        let inner: f64 = au.iter().zip(&av).map(|(x, y)| x * y).sum::<f64>().abs();
        let scale = l2(&u) * l2(&v);
        (inner / scale, inner > delta * scale + CROSS_LEMMA_TOL)
    });
    Ok(CrossLemmaReport {
        trials,
        violations: results.iter().filter(|r| r.1).count(),
        worst_ratio: results.iter().map(|r| r.0).fold(0.0, f64::max),
        delta_2k: delta,
    })
}

//! Dense complex linear algebra and Kronecker-product embedding of
//! site-local spin operators into the `2^N`-dimensional quantum space.
//!
//! Basis conventions, fixed once for the whole crate:
//!
//! - site 1 is the leftmost (slowest-varying) tensor factor, so site `k`
//!   controls bit `N - k` of the basis index;
//! - per site, basis index 0 is spin-up `e1 = [1 0]^T` and index 1 is
//!   spin-down `e2 = [0 1]^T`;
//! - the all-down product state therefore sits at basis index `2^N - 1`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Hard cap on dense matrix dimension (`2^12` = 12 sites).
pub const MAX_DENSE_DIM: usize = 1 << 12;

/// Which odd trigonometric kernel parametrized constructors use.
///
/// The model's algebra is identical for `sin` and `sinh`; every suite runs
/// under one declared flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Convention {
    Trigonometric,
    Hyperbolic,
}

impl Convention {
    /// Evaluate the convention's odd kernel: `sin` or `sinh`.
    pub fn s(self, z: C64) -> C64 {
        match self {
            Convention::Trigonometric => z.sin(),
            Convention::Hyperbolic => z.sinh(),
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Convention::Trigonometric => write!(f, "trig"),
            Convention::Hyperbolic => write!(f, "hyperbolic"),
        }
    }
}

/// Dense row-major complex matrix with explicit dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Self::check_dims(rows, cols)?;
        Ok(Self { rows, cols, entries })
    }

    fn check_dims(rows: usize, cols: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("zero-dimensional matrix".into()));
        }
        if rows > MAX_DENSE_DIM || cols > MAX_DENSE_DIM {
            return Err(Error::Capacity(format!(
                "requested {}x{} exceeds dense cap {}",
                rows, cols, MAX_DENSE_DIM
            )));
        }
        Ok(())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        Ok(Self { rows, cols, entries: vec![C64::new(0.0, 0.0); rows * cols] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim, dim)?;
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Ok(Self { rows, cols, entries })
    }

    /// Diagonal matrix from its diagonal values.
    pub fn diag(values: &[C64]) -> Result<Self> {
        let n = values.len();
        let mut m = Self::zeros(n, n)?;
        for (i, v) in values.iter().enumerate() {
            m.entries[i * n + i] = *v;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// True when no entry is NaN or infinite.
    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}: {}x{} vs {}x{}",
                what, self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "add")?;
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "sub")?;
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); m * n];
        // i-k-j order keeps both operands in row-major streaming access.
        for i in 0..m {
            for p in 0..k {
                let a = self.entries[i * k + p];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.entries[p * n..(p + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row.iter()) {
                    *d += a * b;
                }
            }
        }
        Ok(Self { rows: m, cols: n, entries: out })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "apply: {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let out = self
            .entries
            .chunks(self.cols)
            .map(|row| row.iter().zip(v.iter()).map(|(a, x)| a * x).sum())
            .collect();
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        Self { rows: self.cols, cols: self.rows, entries: out }
    }

    pub fn conjugate_transpose(&self) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.entries[i * self.cols + j].conj();
            }
        }
        Self { rows: self.cols, cols: self.rows, entries: out }
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::Shape(format!("trace of {}x{}", self.rows, self.cols)));
        }
        Ok((0..self.rows).map(|i| self.entries[i * self.cols + i]).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `self * other - other * self`; both operands square and same-dimensional.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if !self.is_square() || !other.is_square() {
            return Err(Error::Shape("commutator of non-square matrices".into()));
        }
        self.same_shape(other, "commutator")?;
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `k`-th matrix power by repeated multiplication.
    pub fn pow(&self, k: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape("pow of non-square matrix".into()));
        }
        let mut out = Self::identity(self.rows)?;
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }
}

/// Kronecker product; block `(i, j)` of the result equals `a[i,j] * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .filter(|&r| r <= MAX_DENSE_DIM)
        .ok_or_else(|| {
            Error::Capacity(format!("kron rows {}*{} over cap {}", a.rows, b.rows, MAX_DENSE_DIM))
        })?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .filter(|&c| c <= MAX_DENSE_DIM)
        .ok_or_else(|| {
            Error::Capacity(format!("kron cols {}*{} over cap {}", a.cols, b.cols, MAX_DENSE_DIM))
        })?;
    let mut out = ComplexMatrix::zeros(rows, cols)?;
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let f = a.get(ia, ja);
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out.set(ia * b.rows + ib, ja * b.cols + jb, f * b.get(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// One two-dimensional site operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SiteOperator {
    Identity,
    /// `diag(1, -1)` in the (up, down) basis.
    SigmaZ,
    /// Raising operator: single 1 at (row 1, col 2), maps down to up.
    SigmaPlus,
    /// Lowering operator: single 1 at (row 2, col 1), maps up to down.
    SigmaMinus,
    /// `diag(e^h, e^{-h})`.
    DiagExp(f64),
}

impl SiteOperator {
    pub fn matrix(self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let entries = match self {
            SiteOperator::Identity => vec![one, z, z, one],
            SiteOperator::SigmaZ => vec![one, z, z, -one],
            SiteOperator::SigmaPlus => vec![z, one, z, z],
            SiteOperator::SigmaMinus => vec![z, z, one, z],
            SiteOperator::DiagExp(h) => {
                vec![C64::new(h.exp(), 0.0), z, z, C64::new((-h).exp(), 0.0)]
            }
        };
        ComplexMatrix::new(2, 2, entries).expect("2x2 literal")
    }
}

/// The `2^N`-dimensional quantum space over `N` two-dimensional sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantumSpace {
    n_sites: usize,
}

impl QuantumSpace {
    /// Maximum number of sites the dense representation supports.
    pub const MAX_SITES: usize = 12;

    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Shape("quantum space needs at least one site".into()));
        }
        if n_sites > Self::MAX_SITES {
            return Err(Error::Capacity(format!(
                "{} sites exceeds dense cap of {}",
                n_sites,
                Self::MAX_SITES
            )));
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        1 << self.n_sites
    }

    /// Basis index of the all-down product state.
    pub fn vacuum_index(&self) -> usize {
        self.dimension() - 1
    }

    /// Spin at `site` (1-based) of basis state `index`: +1 up, -1 down.
    pub fn spin_at(&self, index: usize, site: usize) -> i32 {
        let bit = (index >> (self.n_sites - site)) & 1;
        if bit == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of up spins in basis state `index`.
    pub fn up_count(&self, index: usize) -> usize {
        self.n_sites - (index & (self.dimension() - 1)).count_ones() as usize
    }
}

/// Embed a site operator at site `k` (1-based): `I ⊗ .. ⊗ op ⊗ .. ⊗ I`.
pub fn embed_site(op: SiteOperator, k: usize, space: QuantumSpace) -> Result<ComplexMatrix> {
    if k == 0 || k > space.n_sites() {
        return Err(Error::Index(format!("site {} not in 1..={}", k, space.n_sites())));
    }
    let mut out = ComplexMatrix::identity(1)?;
    for site in 1..=space.n_sites() {
        let factor = if site == k { op.matrix() } else { SiteOperator::Identity.matrix() };
        out = kron(&out, &factor)?;
    }
    Ok(out)
}

/// Diagonal operator acting as `s(u - v + sign*eta)` on the site-`k` spin-up
/// subspace and `s(u - v - sign*eta)` on spin-down, identity elsewhere.
/// `s` is `sin` or `sinh` per the convention flag.
pub fn site_trig(
    u: C64,
    v: C64,
    eta: C64,
    sign: i32,
    k: usize,
    space: QuantumSpace,
    convention: Convention,
) -> Result<ComplexMatrix> {
    if k == 0 || k > space.n_sites() {
        return Err(Error::Index(format!("site {} not in 1..={}", k, space.n_sites())));
    }
    let s = f64::from(sign.signum());
    let up = convention.s(u - v + eta * s);
    let down = convention.s(u - v - eta * s);
    let dim = space.dimension();
    let values: Vec<C64> = (0..dim)
        .map(|idx| if space.spin_at(idx, k) > 0 { up } else { down })
        .collect();
    ComplexMatrix::diag(&values)
}

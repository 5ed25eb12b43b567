//! Dense order-t tensors, CP factorizations, and the elementary tensor
//! products and norms everything else is built on.
//!
//! Layout is row-major with the *last* index fastest; all modules share this
//! convention. Indices are 0-based internally; 1-based notation appears only
//! in file formats and CLI documentation.

use crate::error::{Error, Result};

/// Minimal dense row-major matrix used for CP factors and small solves.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Maximum Euclidean norm over rows, the `‖·‖_{2,∞}` norm.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense real tensor of order `dims.len()`, row-major, last index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    /// Builds a tensor, validating shape and finiteness.
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument(
                "tensor order must be at least 1".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "all tensor dimensions must be positive".into(),
            ));
        }
        let total: usize = dims.iter().product();
        if values.len() != total {
            return Err(Error::DimMismatch(format!(
                "value count {} does not match dims {:?} (need {})",
                values.len(),
                dims,
                total
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor entries must be finite".into()));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        Self::new(dims, vec![0.0; total])
    }

    /// The all-ones tensor J.
    pub fn ones(dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        Self::new(dims, vec![1.0; total])
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Row-major linear index (last index fastest).
    #[inline]
    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        let mut lin = 0;
        for (i, &n) in index.iter().zip(&self.dims) {
            debug_assert!(*i < n);
            lin = lin * n + i;
        }
        lin
    }

    #[inline]
    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.linear_index(index)]
    }

    #[inline]
    pub fn set(&mut self, index: &[usize], v: f64) {
        let lin = self.linear_index(index);
        self.values[lin] = v;
    }

    /// Decodes a linear position back into a multi-index.
    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            idx[k] = lin % self.dims[k];
            lin /= self.dims[k];
        }
        idx
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise max-magnitude norm `|T|_∞`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mean squared error `‖self − other‖_F² / ∏ dims`.
    pub fn mse_vs(&self, other: &DenseTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "mse_vs dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let ss: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(ss / self.values.len() as f64)
    }

    /// Hadamard (entrywise) product.
    pub fn hadamard(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "hadamard dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        DenseTensor::new(self.dims.clone(), values)
    }

    /// Kronecker product of two equal-order tensors. With 0-based indices the
    /// output entry at `k_s = j_s + m_s·i_s` is `T_{i} · S_{j}` where `m_s`
    /// are the dims of `other`.
    pub fn kronecker(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.order() != other.order() {
            return Err(Error::DimMismatch(format!(
                "kronecker order {} vs {}",
                self.order(),
                other.order()
            )));
        }
        let t = self.order();
        let out_dims: Vec<usize> = self
            .dims
            .iter()
            .zip(&other.dims)
            .map(|(n, m)| n * m)
            .collect();
        let mut out = DenseTensor::zeros(out_dims)?;
        let mut idx_i = vec![0usize; t];
        let mut idx_k = vec![0usize; t];
        for (lin_i, &ti) in self.values.iter().enumerate() {
            // decode lin_i into idx_i once per outer entry
            let mut rem = lin_i;
            for k in (0..t).rev() {
                idx_i[k] = rem % self.dims[k];
                rem /= self.dims[k];
            }
            for (lin_j, &sj) in other.values.iter().enumerate() {
                let mut rem = lin_j;
                for k in (0..t).rev() {
                    idx_k[k] = rem % other.dims[k];
                    rem /= other.dims[k];
                }
                for k in 0..t {
                    idx_k[k] += other.dims[k] * idx_i[k];
                }
                let lin_out = out.linear_index(&idx_k);
                out.values[lin_out] = ti * sj;
            }
        }
        Ok(out)
    }

    /// Subtensor restricted to the given index subsets (0-based).
    pub fn subtensor(&self, index_sets: &[Vec<usize>]) -> Result<DenseTensor> {
        if index_sets.len() != self.order() {
            return Err(Error::DimMismatch(format!(
                "subtensor needs {} index sets, got {}",
                self.order(),
                index_sets.len()
            )));
        }
        for (k, set) in index_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidArgument(format!("index set {k} is empty")));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= self.dims[k]) {
                return Err(Error::IndexOutOfRange(format!(
                    "index {bad} out of range for mode {k} (dim {})",
                    self.dims[k]
                )));
            }
            let mut seen = vec![false; self.dims[k]];
            for &i in set {
                if seen[i] {
                    return Err(Error::InvalidArgument(format!(
                        "index {i} repeated in set for mode {k}; index sets are subsets"
                    )));
                }
                seen[i] = true;
            }
        }
        let out_dims: Vec<usize> = index_sets.iter().map(|s| s.len()).collect();
        let mut out = DenseTensor::zeros(out_dims)?;
        let t = self.order();
        let mut src = vec![0usize; t];
        for lin_out in 0..out.values.len() {
            let idx = out.multi_index(lin_out);
            for k in 0..t {
                src[k] = index_sets[k][idx[k]];
            }
            out.values[lin_out] = self.get(&src);
        }
        Ok(out)
    }

    /// Serializes as `t n_1 … n_t` on the first line followed by the values
    /// in row-major order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{}", self.order()));
        for n in &self.dims {
            s.push_str(&format!(" {n}"));
        }
        s.push('\n');
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                s.push(if i % 8 == 0 { '\n' } else { ' ' });
            }
            s.push_str(&format!("{v}"));
        }
        s.push('\n');
        s
    }

    pub fn parse_text(text: &str) -> Result<DenseTensor> {
        let mut tokens = text.split_whitespace();
        let order: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty tensor file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("tensor order: {e}")))?;
        if order == 0 {
            return Err(Error::Parse("tensor order must be at least 1".into()));
        }
        let mut dims = Vec::with_capacity(order);
        for k in 0..order {
            let d: usize = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing dim {k}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("dim {k}: {e}")))?;
            dims.push(d);
        }
        let total: usize = dims.iter().product();
        let mut values = Vec::with_capacity(total);
        for tok in tokens {
            let v: f64 = tok
                .parse()
                .map_err(|e| Error::Parse(format!("value {}: {e}", values.len())))?;
            values.push(v);
        }
        if values.len() != total {
            return Err(Error::Parse(format!(
                "expected {} values for dims {:?}, found {}",
                total,
                dims,
                values.len()
            )));
        }
        DenseTensor::new(dims, values)
    }
}

/// Rank-r CP factorization: one `n_i × r` factor matrix per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CpFactors {
    rank: usize,
    factors: Vec<Mat>,
}

impl CpFactors {
    pub fn new(factors: Vec<Mat>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one factor matrix".into(),
            ));
        }
        let rank = factors[0].cols();
        if rank == 0 {
            return Err(Error::InvalidArgument("CP rank must be positive".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.cols() != rank {
                return Err(Error::DimMismatch(format!(
                    "factor {i} has {} columns, expected {rank}",
                    f.cols()
                )));
            }
            if !f.is_finite() {
                return Err(Error::NonFinite(format!(
                    "factor {i} has non-finite entries"
                )));
            }
        }
        Ok(Self { rank, factors })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Mat] {
        &self.factors
    }

    pub fn factors_mut(&mut self) -> &mut [Mat] {
        &mut self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }

    /// Evaluates a single entry `Σ_l ∏_j U^{(j)}[i_j, l]`.
    pub fn entry(&self, index: &[usize]) -> f64 {
        let mut sum = 0.0;
        for l in 0..self.rank {
            let mut prod = 1.0;
            for (j, f) in self.factors.iter().enumerate() {
                prod *= f.at(index[j], l);
            }
            sum += prod;
        }
        sum
    }

    /// Expands the factorization into a dense tensor.
    pub fn to_dense(&self) -> Result<DenseTensor> {
        let dims = self.dims();
        let mut out = DenseTensor::zeros(dims)?;
        let t = self.order();
        let mut idx = vec![0usize; t];
        for lin in 0..out.len() {
            let mut rem = lin;
            for k in (0..t).rev() {
                idx[k] = rem % out.dims()[k];
                rem /= out.dims()[k];
            }
            out.values_mut()[lin] = self.entry(&idx);
        }
        // construction guarantees finiteness of factors; overflow can still
        // produce inf on adversarial input
        if !out.values().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(
                "cp_to_dense produced non-finite entries".into(),
            ));
        }
        Ok(out)
    }
}

/// Functional alias matching the operation vocabulary used elsewhere.
pub fn cp_to_dense(factors: &CpFactors) -> Result<DenseTensor> {
    factors.to_dense()
}

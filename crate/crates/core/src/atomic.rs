//! Exact atomic-norm computation on tiny tensors.
//!
//! The atomic norm of a tensor is the least total absolute coefficient
//! weight over decompositions into rank-1 sign tensors. The rank-1 sign
//! tensors span the whole tensor space, so the norm is the optimum of an
//! L1 program, solved here exactly with the in-crate simplex on the split
//! formulation `min 1ᵀ(α⁺+α⁻) s.t. A(α⁺−α⁻) = vec(T), α± ≥ 0` where the
//! columns of `A` are the vectorized canonical atoms. Feasible only at
//! oracle scale: the atom count is `2^{(Σ n_i) − 1}`.

use crate::error::{Error, Result};
use crate::simplex::{self, ColMatrix};
use crate::tensor::{CpFactors, DenseTensor};

/// Upper bound on Grothendieck's constant over the reals, the value the
/// rank bound is evaluated with.
pub const GROTHENDIECK_BOUND: f64 = 1.783;

/// Default cap on the number of enumerated atoms (2^16).
pub const DEFAULT_ATOM_CAP: usize = 1 << 16;

/// Tolerance for validating that a decomposition reconstructs its input.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// A rank-1 sign tensor `s^{(1)} ∘ … ∘ s^{(t)}` with every entry ±1.
/// Canonical form fixes the first entry of `s^{(1)}` to +1 so each ±
/// pair of atoms is represented once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignAtom {
    signs: Vec<Vec<i8>>,
}

impl SignAtom {
    pub fn new(signs: Vec<Vec<i8>>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidArgument(
                "atom needs at least one mode".into(),
            ));
        }
        for s in &signs {
            if s.is_empty() {
                return Err(Error::InvalidArgument("empty sign vector".into()));
            }
            if s.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::InvalidArgument("sign entries must be ±1".into()));
            }
        }
        if signs[0][0] != 1 {
            return Err(Error::InvalidArgument(
                "canonical atom has +1 as the first entry of the first mode".into(),
            ));
        }
        Ok(Self { signs })
    }

    pub fn signs(&self) -> &[Vec<i8>] {
        &self.signs
    }

    pub fn dims(&self) -> Vec<usize> {
        self.signs.iter().map(|s| s.len()).collect()
    }

    /// Entry at a 0-based multi-index: `∏_j s^{(j)}[i_j]`.
    #[inline]
    pub fn entry(&self, index: &[usize]) -> f64 {
        let mut sign = 1i8;
        for (j, s) in self.signs.iter().enumerate() {
            sign *= s[index[j]];
        }
        sign as f64
    }

    /// Dense ±1 tensor form.
    pub fn to_dense(&self) -> DenseTensor {
        let dims = self.dims();
        let total: usize = dims.iter().product();
        let mut values = vec![0.0; total];
        let t = dims.len();
        let mut idx = vec![0usize; t];
        for (lin, v) in values.iter_mut().enumerate() {
            let mut rem = lin;
            for k in (0..t).rev() {
                idx[k] = rem % dims[k];
                rem /= dims[k];
            }
            *v = self.entry(&idx);
        }
        DenseTensor::new(dims, values).expect("sign atoms are always valid tensors")
    }
}

/// Enumerates every canonical rank-1 sign atom for the given dims:
/// exactly `2^{(Σ n_i) − 1}` atoms. Errors when the count exceeds `cap`.
pub fn enumerate_atoms_capped(dims: &[usize], cap: usize) -> Result<Vec<SignAtom>> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("atom dims must be nonempty".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("atom dims must be positive".into()));
    }
    let total_bits: usize = dims.iter().sum::<usize>() - 1;
    if total_bits >= usize::BITS as usize || (1usize << total_bits) > cap {
        return Err(Error::TooLarge(format!(
            "atom enumeration for dims {dims:?} needs 2^{total_bits} atoms, cap is {cap}"
        )));
    }
    let count = 1usize << total_bits;
    let mut atoms = Vec::with_capacity(count);
    for code in 0..count {
        let mut signs = Vec::with_capacity(dims.len());
        let mut bit = 0;
        for (j, &n) in dims.iter().enumerate() {
            let mut s = Vec::with_capacity(n);
            for i in 0..n {
                // first entry of the first mode is pinned to +1
                if j == 0 && i == 0 {
                    s.push(1i8);
                } else {
                    s.push(if (code >> bit) & 1 == 0 { 1 } else { -1 });
                    bit += 1;
                }
            }
            signs.push(s);
        }
        atoms.push(SignAtom { signs });
    }
    Ok(atoms)
}

/// Enumerates atoms with the default cap of 2^16.
pub fn enumerate_atoms(dims: &[usize]) -> Result<Vec<SignAtom>> {
    enumerate_atoms_capped(dims, DEFAULT_ATOM_CAP)
}

/// An optimal decomposition `T = Σ_i α_i · atom_i` with
/// `value = Σ_i |α_i|` equal to the atomic norm.
#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub atoms: Vec<SignAtom>,
    pub coefficients: Vec<f64>,
    pub value: f64,
}

impl AtomicDecomposition {
    /// Largest entrywise deviation of `Σ α_i atom_i` from `target`.
    pub fn reconstruction_error(&self, target: &DenseTensor) -> f64 {
        let mut recon = vec![0.0; target.len()];
        for (atom, &coef) in self.atoms.iter().zip(&self.coefficients) {
            let dense = atom.to_dense();
            for (r, v) in recon.iter_mut().zip(dense.values()) {
                *r += coef * v;
            }
        }
        recon
            .iter()
            .zip(target.values())
            .map(|(r, t)| (r - t).abs())
            .fold(0.0, f64::max)
    }
}

/// Computes the atomic norm of `T` exactly via the L1 linear program,
/// using the default atom cap.
pub fn atomic_norm(t: &DenseTensor) -> Result<AtomicDecomposition> {
    atomic_norm_capped(t, DEFAULT_ATOM_CAP)
}

pub fn atomic_norm_capped(t: &DenseTensor, cap: usize) -> Result<AtomicDecomposition> {
    let atoms = enumerate_atoms_capped(t.dims(), cap)?;
    let m = t.len();
    let n_atoms = atoms.len();

    // columns: first the atoms (α⁺), then their negations (α⁻)
    let mut a = ColMatrix::zeros(m, 2 * n_atoms);
    for (j, atom) in atoms.iter().enumerate() {
        let dense = atom.to_dense();
        let col = a.col_mut(j);
        col.copy_from_slice(dense.values());
    }
    for j in 0..n_atoms {
        let neg: Vec<f64> = a.col(j).iter().map(|v| -v).collect();
        a.col_mut(n_atoms + j).copy_from_slice(&neg);
    }
    let c = vec![1.0; 2 * n_atoms];
    let sol = simplex::solve(&c, &a, t.values())?;

    let mut kept_atoms = Vec::new();
    let mut coefficients = Vec::new();
    for (j, atom) in atoms.iter().enumerate() {
        let alpha = sol.x[j] - sol.x[n_atoms + j];
        if alpha.abs() > 1e-12 {
            kept_atoms.push(atom.clone());
            coefficients.push(alpha);
        }
    }
    let decomp = AtomicDecomposition {
        atoms: kept_atoms,
        coefficients,
        value: sol.objective.max(0.0),
    };
    let err = decomp.reconstruction_error(t);
    if err > RECONSTRUCTION_TOL {
        return Err(Error::LpFailure(format!(
            "optimal basis fails to reconstruct the input (entrywise error {err:.3e})"
        )));
    }
    Ok(decomp)
}

/// Closed-form rank bound on the atomic norm:
/// `K_G · √(r^{3t−5}) · |T|_∞` with `K_G = 1.783`.
pub fn atomic_rank_bound(r: u32, t: u32, linf: f64) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument(
            "tensor order must be at least 2".into(),
        ));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    if !linf.is_finite() || linf < 0.0 {
        return Err(Error::InvalidArgument("ℓ∞ norm must be nonnegative".into()));
    }
    let exponent = 3.0 * f64::from(t) - 5.0;
    Ok(GROTHENDIECK_BOUND * f64::from(r).powf(exponent).sqrt() * linf)
}

/// Product over modes of the maximum row 2-norm of each factor: an upper
/// bound on `‖T‖_max` for the tensor the factors expand to.
pub fn maxq_value_of_factors(factors: &CpFactors) -> f64 {
    factors.factors().iter().map(|f| f.max_row_norm()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Mat;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn atom_counts() {
        // 2^{(Σ n_i) − 1} canonical atoms
        assert_eq!(enumerate_atoms(&[2, 2]).unwrap().len(), 8);
        assert_eq!(enumerate_atoms(&[2, 2, 2]).unwrap().len(), 32);
        let scalar = enumerate_atoms(&[1, 1]).unwrap();
        assert_eq!(scalar.len(), 2);
        assert_eq!(scalar[0].to_dense().values(), &[1.0]);
        assert_eq!(scalar[1].to_dense().values(), &[-1.0]);
    }

    #[test]
    fn atoms_are_unique_and_canonical() {
        let atoms = enumerate_atoms(&[2, 3]).unwrap();
        let mut seen = std::collections::HashSet::new();
        for a in &atoms {
            assert_eq!(a.signs()[0][0], 1);
            let key: Vec<i8> = a.signs().iter().flatten().copied().collect();
            assert!(seen.insert(key), "duplicate atom");
        }
    }

    #[test]
    fn atoms_span_the_space() {
        // every coordinate tensor e_i must be expressible: the LP is
        // feasible for a basis-vector target
        let mut t = DenseTensor::zeros(vec![2, 2]).unwrap();
        t.set(&[1, 0], 1.0);
        let d = atomic_norm(&t).unwrap();
        assert!(d.reconstruction_error(&t) < 1e-9);
    }

    #[test]
    fn cap_exceeded_is_error() {
        assert!(matches!(
            enumerate_atoms_capped(&[8, 8, 8], 1 << 10),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn sign_tensor_has_norm_one() {
        let atoms = enumerate_atoms(&[2, 2]).unwrap();
        for atom in atoms.iter().step_by(3) {
            let d = atomic_norm(&atom.to_dense()).unwrap();
            assert_abs_diff_eq!(d.value, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_tensor_has_norm_zero() {
        let z = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let d = atomic_norm(&z).unwrap();
        assert_abs_diff_eq!(d.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hadamard_matrix_has_norm_two() {
        let h = DenseTensor::new(vec![2, 2], vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let d = atomic_norm(&h).unwrap();
        assert_abs_diff_eq!(d.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn rank1_unit_linf_norm_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let dims = [2usize, 2, 2];
            let factors: Vec<Mat> = dims
                .iter()
                .map(|&n| {
                    Mat::new(n, 1, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
                })
                .collect();
            let t = CpFactors::new(factors).unwrap().to_dense().unwrap();
            let d = atomic_norm(&t).unwrap();
            assert!(d.value <= 1.0 + 1e-7, "rank-1 bound violated: {}", d.value);
        }
    }

    #[test]
    fn rank_bound_values() {
        assert_abs_diff_eq!(
            atomic_rank_bound(1, 3, 1.0).unwrap(),
            1.783,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(atomic_rank_bound(1, 2, 0.0).unwrap(), 0.0, epsilon = 1e-15);
        // r=3, t=3: 1.783·√(3⁴)·2 = 1.783·9·2
        assert_abs_diff_eq!(
            atomic_rank_bound(3, 3, 2.0).unwrap(),
            32.094,
            epsilon = 1e-9
        );
        assert!(atomic_rank_bound(1, 1, 1.0).is_err());
    }

    #[test]
    fn maxq_of_factors() {
        // all-ones single columns → product of row norms 1
        let f = Mat::new(3, 1, vec![1.0; 3]).unwrap();
        let cp = CpFactors::new(vec![f.clone(), f.clone(), f]).unwrap();
        assert_abs_diff_eq!(maxq_value_of_factors(&cp), 1.0, epsilon = 1e-12);

        // U1 = [3,4] (one row), U2 = [1,0] → 5·1
        let u1 = Mat::new(1, 2, vec![3.0, 4.0]).unwrap();
        let u2 = Mat::new(1, 2, vec![1.0, 0.0]).unwrap();
        let cp = CpFactors::new(vec![u1, u2]).unwrap();
        assert_abs_diff_eq!(maxq_value_of_factors(&cp), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn maxq_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f1 = Mat::new(2, 2, (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let f2 = Mat::new(3, 2, (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let base = maxq_value_of_factors(&CpFactors::new(vec![f1.clone(), f2.clone()]).unwrap());
        let mut scaled = f1.clone();
        scaled.scale(-2.5);
        let v = maxq_value_of_factors(&CpFactors::new(vec![scaled, f2]).unwrap());
        assert_abs_diff_eq!(v, 2.5 * base, epsilon = 1e-12);
    }
}

use crate::error::{Error, Result};
use crate::linalg::*;

/// Dense antisymmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    d: usize,
    data: Vec<C64>,
}

impl SkewMatrix {
    /// Validates `m + mᵀ = 0` entrywise to 1e-10.
    pub fn new(d: usize, data: Vec<C64>) -> Result<Self> {
        assert_eq!(data.len(), d * d);
        let mut residual: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                residual = residual.max((data[i * d + j] + data[j * d + i]).norm());
            }
        }
        if residual > 1e-10 {
            return Err(Error::NotSkew { residual });
        }
        Ok(SkewMatrix { d, data })
    }

    /// Builds from the strict upper triangle, filling the rest antisymmetrically.
    pub fn from_upper(d: usize, mut upper: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in i + 1..d {
                let v = upper(i, j);
                data[i * d + j] = v;
                data[j * d + i] = -v;
            }
        }
        SkewMatrix { d, data }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.d + j]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

pub fn pfaffian(m: &SkewMatrix) -> C64 {
    let mut a = m.data.clone();
    pfaffian_in_place(&mut a, m.d)
}

/// Parlett–Reid elimination with pivoting; destroys `a`. Odd `d` gives 0.
pub fn pfaffian_in_place(a: &mut [C64], d: usize) -> C64 {
    if d % 2 == 1 {
        return ZERO;
    }
    let mut pf = ONE;
    let mut k = 0;
    while k + 1 < d {
        // pivot: largest |a[i][k]| for i > k
        let mut kp = k + 1;
        let mut best = a[(k + 1) * d + k].norm();
        for i in k + 2..d {
            let v = a[i * d + k].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for col in 0..d {
                a.swap((k + 1) * d + col, kp * d + col);
            }
            for row in 0..d {
                a.swap(row * d + k + 1, row * d + kp);
            }
            pf = -pf;
        }
        let piv = a[k * d + k + 1];
        if piv == ZERO {
            return ZERO;
        }
        pf *= piv;
        if k + 2 < d {
            let inv = ONE / piv;
            let tau: Vec<C64> = (k + 2..d).map(|j| a[k * d + j] * inv).collect();
            let col: Vec<C64> = (k + 2..d).map(|i| a[i * d + k + 1]).collect();
            let m = d - k - 2;
            for i in 0..m {
                let row = (k + 2 + i) * d + k + 2;
                let (ti, ci) = (tau[i], col[i]);
                for j in 0..m {
                    a[row + j] += ti * col[j] - ci * tau[j];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Signed sum over perfect matchings; exponential, for tests only.
pub fn pfaffian_brute_force(m: &SkewMatrix) -> C64 {
    fn rec(m: &SkewMatrix, rest: &mut Vec<usize>) -> C64 {
        if rest.is_empty() {
            return ONE;
        }
        let first = rest.remove(0);
        let mut total = ZERO;
        for idx in 0..rest.len() {
            let partner = rest.remove(idx);
            let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
            total += m.get(first, partner) * sign * rec(m, rest);
            rest.insert(idx, partner);
        }
        rest.insert(0, first);
        total
    }
    if m.d % 2 == 1 {
        return ZERO;
    }
    rec(m, &mut (0..m.d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_skew(d: usize, rng: &mut ChaCha8Rng) -> SkewMatrix {
        SkewMatrix::from_upper(d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn two_by_two() {
        let a = c(0.3, -1.2);
        let m = SkewMatrix::new(2, vec![ZERO, a, -a, ZERO]).unwrap();
        assert_eq!(pfaffian(&m), a);
    }

    #[test]
    fn four_by_four_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = random_skew(4, &mut rng);
            let g = |i: usize, j: usize| m.get(i, j);
            let closed = g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
            assert!((pfaffian(&m) - closed).norm() < 1e-12);
            assert!((pfaffian_brute_force(&m) - closed).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_matching_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [6, 8, 10] {
            let m = random_skew(d, &mut rng);
            assert!((pfaffian(&m) - pfaffian_brute_force(&m)).norm() < 1e-12);
        }
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_skew(12, &mut rng);
        let det = DMatrix::from_row_slice(12, 12, m.data()).determinant();
        let pf = pfaffian(&m);
        assert!((pf * pf - det).norm() / det.norm() < 1e-8);
    }

    #[test]
    fn odd_and_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        assert_eq!(pfaffian(&random_skew(5, &mut rng)), ZERO);
        assert_eq!(pfaffian(&SkewMatrix::from_upper(4, |_, _| ZERO)), ZERO);
    }

    #[test]
    fn rejects_non_skew() {
        let r = SkewMatrix::new(2, vec![ZERO, ONE, ONE, ZERO]);
        assert!(matches!(r, Err(Error::NotSkew { .. })));
    }
}

//! Small fixed-size complex matrices and random-state helpers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real2(m: [[f64; 2]; 2]) -> Mat2 {
    [[c(m[0][0], 0.0), c(m[0][1], 0.0)], [c(m[1][0], 0.0), c(m[1][1], 0.0)]]
}

pub fn id2() -> Mat2 {
    real2([[1.0, 0.0], [0.0, 1.0]])
}
pub fn pauli_x() -> Mat2 {
    real2([[0.0, 1.0], [1.0, 0.0]])
}
pub fn pauli_y() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}
pub fn pauli_z() -> Mat2 {
    real2([[1.0, 0.0], [0.0, -1.0]])
}
pub fn hadamard() -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    real2([[s, s], [s, -s]])
}

pub fn scale2(m: &Mat2, s: C64) -> Mat2 {
    let mut out = *m;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger2(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn det2(a: &Mat2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Max-abs deviation of `a† a` from the identity.
pub fn unitarity_residual2(a: &Mat2) -> f64 {
    let p = mul2(&dagger2(a), a);
    let id = id2();
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            r = r.max((p[i][j] - id[i][j]).norm());
        }
    }
    r
}

pub fn id4() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut s = ZERO;
            for k in 0..4 {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn dagger4(a: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// `a ⊗ b` with `a` acting on the upper line (the more significant index bit).
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[i >> 1][j >> 1] * b[i & 1][j & 1];
        }
    }
    out
}

pub fn max_abs_diff4(a: &Mat4, b: &Mat4) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            r = r.max((a[i][j] - b[i][j]).norm());
        }
    }
    r
}

pub fn unitarity_residual4(a: &Mat4) -> f64 {
    max_abs_diff4(&mul4(&dagger4(a), a), &id4())
}

pub fn mat4_to_dmatrix(a: &Mat4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| a[i][j])
}

pub fn dmatrix_to_mat4(a: &DMatrix<C64>) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[(i, j)];
        }
    }
    out
}

/// `|<a|b>|^2` for normalised vectors; insensitive to global phase.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ov: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ov.norm_sqr()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Haar-random vector of dimension `dim`.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let nrm = norm(&v);
    for x in &mut v {
        *x /= nrm;
    }
    v
}

/// Haar-random `dim × dim` unitary via QR with the phase fix of Mezzadri.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let u = random_unitary(2, rng);
    [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]]
}

pub fn random_unitary4<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    dmatrix_to_mat4(&random_unitary(4, rng))
}

/// Completes a normalised vector to a unitary whose first column is `v`.
pub fn unitary_with_first_column(v: &[C64]) -> DMatrix<C64> {
    let d = v.len();
    let mut cols: Vec<Vec<C64>> = vec![v.to_vec()];
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut w: Vec<C64> = (0..d).map(|i| if i == e { ONE } else { ZERO }).collect();
        for _ in 0..2 {
            for col in &cols {
                let ov: C64 = col.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, ci) in w.iter_mut().zip(col) {
                    *wi -= ov * ci;
                }
            }
        }
        let nrm = norm(&w);
        if nrm > 1e-6 {
            for x in &mut w {
                *x /= nrm;
            }
            cols.push(w);
        }
    }
    DMatrix::from_fn(d, d, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pauli_products() {
        let xy = mul2(&pauli_x(), &pauli_y());
        let iz = scale2(&pauli_z(), I);
        for i in 0..2 {
            for j in 0..2 {
                assert!((xy[i][j] - iz[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert!(unitarity_residual4(&random_unitary4(&mut rng)) < 1e-12);
            assert!(unitarity_residual2(&random_unitary2(&mut rng)) < 1e-12);
        }
    }

    #[test]
    fn completion_keeps_first_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_state(4, &mut rng);
        let u = unitary_with_first_column(&v);
        for i in 0..4 {
            assert!((u[(i, 0)] - v[i]).norm() < 1e-14);
        }
        assert!(unitarity_residual4(&dmatrix_to_mat4(&u)) < 1e-12);
    }
}

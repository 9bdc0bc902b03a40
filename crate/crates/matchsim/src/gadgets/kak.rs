use nalgebra::{DMatrix, Matrix4, SymmetricEigen};

use super::basic::single_qubit_unitary;
use super::GadgetExpansion;
use crate::circuit::{Matchgate, MatchgateAngles};
use crate::error::{Error, Result};
use crate::linalg::*;

const RECONSTRUCTION_TOL: f64 = 1e-10;

/// `u = e^{iγ} (a1 ⊗ b1) e^{i(x XX + y YY + z ZZ)} (a2 ⊗ b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kak {
    pub phase: f64,
    pub a1: Mat2,
    pub b1: Mat2,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub a2: Mat2,
    pub b2: Mat2,
}

impl Kak {
    pub fn to_mat4(&self) -> Mat4 {
        let core = mat4_to_dmatrix(&kron2(&pauli_x(), &pauli_x())) * c(0.0, self.x)
            + mat4_to_dmatrix(&kron2(&pauli_y(), &pauli_y())) * c(0.0, self.y)
            + mat4_to_dmatrix(&kron2(&pauli_z(), &pauli_z())) * c(0.0, self.z);
        let core = dmatrix_to_mat4(&core.exp());
        let m = mul4(&kron2(&self.a1, &self.b1), &mul4(&core, &kron2(&self.a2, &self.b2)));
        let ph = C64::from_polar(1.0, self.phase);
        std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] * ph))
    }
}

fn magic_basis() -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), ZERO, c(0.0, s));
    DMatrix::from_row_slice(4, 4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

fn factor_kron(m: &DMatrix<C64>) -> Result<(Mat2, Mat2)> {
    let block = |p: usize, q: usize| -> Mat2 { [[m[(2 * p, 2 * q)], m[(2 * p, 2 * q + 1)]], [m[(2 * p + 1, 2 * q)], m[(2 * p + 1, 2 * q + 1)]]] };
    let norm2 = |b: &Mat2| b.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    let (mut bp, mut bq) = (0, 0);
    for p in 0..2 {
        for q in 0..2 {
            if norm2(&block(p, q)) > norm2(&block(bp, bq)) {
                bp = p;
                bq = q;
            }
        }
    }
    let big = block(bp, bq);
    let cmat = scale2(&big, det2(&big).sqrt().inv());
    let cd = dagger2(&cmat);
    let mut a = [[ZERO; 2]; 2];
    for (p, row) in a.iter_mut().enumerate() {
        for (q, v) in row.iter_mut().enumerate() {
            let t = mul2(&cd, &block(p, q));
            *v = (t[0][0] + t[1][1]) / 2.0;
        }
    }
    let rebuilt = mat4_to_dmatrix(&kron2(&a, &cmat));
    let res = (rebuilt - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if res > 1e-9 {
        return Err(Error::DecompositionFailure(format!("local factor is not a tensor product (residual {res:.3e})")));
    }
    Ok((a, cmat))
}

/// Canonical decomposition through the magic basis, in which local SU(2)⊗SU(2)
/// maps to SO(4) and `e^{i(xXX+yYY+zZZ)}` is diagonal.
pub fn kak_decompose(u: &Mat4) -> Result<Kak> {
    let res = unitarity_residual4(u);
    if !(res <= 1e-8) {
        return Err(Error::DecompositionFailure(format!("matrix is not unitary (residual {res:.3e})")));
    }
    let um = mat4_to_dmatrix(u);
    let det = um.determinant();
    let ph = C64::from_polar(1.0, det.arg() / 4.0);
    let us = &um / ph;
    let b = magic_basis();
    let bd = b.adjoint();
    let up = &bd * &us * &b;
    let m2 = up.transpose() * &up;
    // Re and Im of the symmetric unitary commute; a generic combination has
    // a nondegenerate spectrum shared with both
    let mut found = None;
    for r in [0.351_872_9, 1.263_907_4, 2.807_115_3, 0.577_215_664, 4.669_201_609] {
        let s = Matrix4::from_fn(|i, j| m2[(i, j)].re + r * m2[(i, j)].im);
        let eig = SymmetricEigen::new(s);
        let p = DMatrix::from_fn(4, 4, |i, j| c(eig.eigenvectors[(i, j)], 0.0));
        let d = p.transpose() * &m2 * &p;
        let off = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| d[(i, j)].norm()).fold(0.0, f64::max);
        if off < 1e-10 {
            found = Some((p, d));
            break;
        }
    }
    let (mut p, d) = found.ok_or_else(|| Error::DecompositionFailure("could not diagonalise the magic-basis square".into()))?;
    if p.determinant().re < 0.0 {
        for i in 0..4 {
            p[(i, 0)] = -p[(i, 0)];
        }
    }
    let mut theta: Vec<f64> = (0..4).map(|k| d[(k, k)].arg() / 2.0).collect();
    let delta_inv = |t: &[f64]| DMatrix::from_fn(4, 4, |i, j| if i == j { C64::from_polar(1.0, -t[i]) } else { ZERO });
    let mut k1 = &up * &p * delta_inv(&theta);
    if k1.determinant().re < 0.0 {
        theta[0] += std::f64::consts::PI;
        k1 = &up * &p * delta_inv(&theta);
    }
    let left = &b * &k1 * &bd;
    let right = &b * p.transpose() * &bd;
    let (a1, b1) = factor_kron(&left)?;
    let (a2, b2) = factor_kron(&right)?;
    // θ_k = x·xx_k + y·yy_k + z·zz_k + g with the magic-basis eigenvalues
    let diag = |m: Mat4| -> Vec<f64> {
        let t = &bd * mat4_to_dmatrix(&m) * &b;
        (0..4).map(|k| t[(k, k)].re).collect()
    };
    let (xx, yy, zz) = (diag(kron2(&pauli_x(), &pauli_x())), diag(kron2(&pauli_y(), &pauli_y())), diag(kron2(&pauli_z(), &pauli_z())));
    let sys = Matrix4::from_fn(|k, j| match j {
        0 => xx[k],
        1 => yy[k],
        2 => zz[k],
        _ => 1.0,
    });
    let rhs = nalgebra::Vector4::from_fn(|k, _| theta[k]);
    let sol = sys.lu().solve(&rhs).ok_or_else(|| Error::DecompositionFailure("singular coefficient system".into()))?;
    let kak = Kak { phase: ph.arg() + sol[3], a1, b1, x: sol[0], y: sol[1], z: sol[2], a2, b2 };
    let err = max_abs_diff4(&kak.to_mat4(), u);
    if err > RECONSTRUCTION_TOL {
        return Err(Error::DecompositionFailure(format!("reconstruction residual {err:.3e}")));
    }
    Ok(kak)
}

/// Arbitrary unitary on lines `line`, `line + 1`, with `|+>` ancillas on
/// `line − 1` and `line + 2`. Matchgates are emitted as they are; anything
/// else goes through [`kak_decompose`], with the ZZ factor applied as
/// `(H⊗H) e^{izXX} (H⊗H)`.
pub fn two_qubit_unitary(line: usize, u: &Mat4) -> Result<GadgetExpansion> {
    if line == 0 {
        return Err(Error::validation("macro-layout", "two_qubit_unitary needs an ancilla above the pair"));
    }
    let mut e = GadgetExpansion::new();
    if let Ok(g) = Matchgate::from_mat4(u) {
        e.gate(line, g);
        return Ok(e);
    }
    let k = kak_decompose(u)?;
    e.append(single_qubit_unitary(line, line - 1, &k.a2)?);
    e.append(single_qubit_unitary(line + 1, line + 2, &k.b2)?);
    if k.x.abs() > 1e-14 || k.y.abs() > 1e-14 {
        e.gate(line, Matchgate::from_angles(MatchgateAngles::new(k.x, k.y, 0.0, 0.0, 0.0, 0.0)));
    }
    let (fa, fb) = if k.z.sin().abs() > 1e-12 {
        e.append(single_qubit_unitary(line, line - 1, &hadamard())?);
        e.append(single_qubit_unitary(line + 1, line + 2, &hadamard())?);
        e.gate(line, Matchgate::xx_rotation(k.z));
        (mul2(&k.a1, &hadamard()), mul2(&k.b1, &hadamard()))
    } else {
        // e^{izZZ} = cos z · I here
        (k.a1, k.b1)
    };
    e.append(single_qubit_unitary(line, line - 1, &fa)?);
    e.append(single_qubit_unitary(line + 1, line + 2, &fb)?);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Block, Circuit, InputSpec};
    use crate::oracle::run_branches;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cz() -> Mat4 {
        let mut m = id4();
        m[3][3] = -ONE;
        m
    }

    fn apply(u: &Mat4, psi: &[C64]) -> Vec<C64> {
        (0..4).map(|i| (0..4).map(|j| u[i][j] * psi[j]).sum()).collect()
    }

    /// Runs the expansion on |+> ψ |+> and returns the fidelity with u ψ.
    fn oracle_fidelity(u: &Mat4, psi: &[C64]) -> f64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [c(s, 0.0), c(s, 0.0)];
        let input = InputSpec::new(vec![
            Block::Product(vec![plus]),
            Block::Entangled { k: 2, amps: psi.to_vec() },
            Block::Product(vec![plus]),
        ])
        .unwrap();
        let e = two_qubit_unitary(1, u).unwrap();
        let c = Circuit::new(input, e.prologue).unwrap();
        let st = &run_branches(&c).unwrap()[0].state;
        st.subsystem_fidelity(&[1, 2], &apply(u, psi))
    }

    #[test]
    fn matchgate_passes_through() {
        let g = Matchgate::from_angles(MatchgateAngles::new(0.3, -0.7, 0.0, 0.0, 0.0, 0.0));
        let e = two_qubit_unitary(1, &g.to_mat4()).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.cost.gates, 1);
    }

    #[test]
    fn cz_on_basis_states() {
        let e = two_qubit_unitary(1, &cz()).unwrap();
        assert!(e.len() > 1);
        for idx in 0..4 {
            let mut psi = vec![ZERO; 4];
            psi[idx] = ONE;
            assert!(oracle_fidelity(&cz(), &psi) > 1.0 - 1e-10);
        }
        let s = 0.5;
        assert!(oracle_fidelity(&cz(), &[c(s, 0.0); 4]) > 1.0 - 1e-10);
    }

    #[test]
    fn swap_and_cnot_decompose() {
        let mut swap = [[ZERO; 4]; 4];
        swap[0][0] = ONE;
        swap[1][2] = ONE;
        swap[2][1] = ONE;
        swap[3][3] = ONE;
        let mut cnot = [[ZERO; 4]; 4];
        cnot[0][0] = ONE;
        cnot[1][1] = ONE;
        cnot[2][3] = ONE;
        cnot[3][2] = ONE;
        for u in [swap, cnot, kron2(&hadamard(), &pauli_y())] {
            let k = kak_decompose(&u).unwrap();
            assert!(max_abs_diff4(&k.to_mat4(), &u) < 1e-10);
        }
    }

    #[test]
    fn random_unitaries_on_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..12 {
            let u = random_unitary4(&mut rng);
            let psi = random_state(4, &mut rng);
            assert!(oracle_fidelity(&u, &psi) > 1.0 - 1e-8);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let mut m = id4();
        m[0][1] = ONE;
        assert!(matches!(kak_decompose(&m), Err(Error::DecompositionFailure(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn reconstruction_within_tolerance(seed in any::<u64>()) {
            let u = random_unitary4(&mut ChaCha8Rng::seed_from_u64(seed));
            let k = kak_decompose(&u).unwrap();
            prop_assert!(max_abs_diff4(&k.to_mat4(), &u) <= RECONSTRUCTION_TOL);
        }
    }
}

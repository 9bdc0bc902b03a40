//! Jordan–Wigner Majorana operators, rotation matrices and Pauli expectations.
//!
//! Indices are 0-based: `c_{2k} = Z…Z X_k` and `c_{2k+1} = Z…Z Y_k`, so the
//! annihilator of line `k` is `a_k = (c_{2k} + i c_{2k+1}) / 2` and
//! `a_k† a_k = |1><1|_k`.

use std::fmt;

use crate::circuit::{Block, InputSpec, Matchgate};
use crate::error::{Error, Result};
use crate::linalg::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(self · other) = i^k · result`.
    fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        }
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => id2(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// `i^phase · letters[0] ⊗ letters[1] ⊗ …`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub phase: u8,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { phase: 0, letters: vec![Pauli::I; n] }
    }

    pub fn phase_value(&self) -> C64 {
        [ONE, I, -ONE, -I][(self.phase & 3) as usize]
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.letters.len(), other.letters.len());
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(a, b)| {
                let (k, p) = a.mul(*b);
                phase += k;
                p
            })
            .collect();
        PauliString { phase: phase & 3, letters }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ["+", "+i", "-", "-i"][self.phase as usize])?;
        for l in &self.letters {
            write!(f, "{}", match l {
                Pauli::I => '.',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })?;
        }
        Ok(())
    }
}

pub fn majorana_pauli(mu: usize, n: usize) -> PauliString {
    assert!(mu < 2 * n, "Majorana index {mu} out of range for n = {n}");
    let k = mu / 2;
    let mut letters = vec![Pauli::I; n];
    for l in letters.iter_mut().take(k) {
        *l = Pauli::Z;
    }
    letters[k] = if mu.is_multiple_of(2) { Pauli::X } else { Pauli::Y };
    PauliString { phase: 0, letters }
}

pub fn pauli_product(ps: &[PauliString]) -> PauliString {
    let n = ps.first().map_or(0, |p| p.letters.len());
    ps.iter().fold(PauliString::identity(n), |acc, p| acc.mul(p))
}

/// Ordered product `c_{s_1} c_{s_2} …` over the set bits of `mask`, ascending.
pub fn monomial_pauli(mask: u64, n: usize) -> PauliString {
    let mut acc = PauliString::identity(n);
    for mu in 0..2 * n {
        if mask >> mu & 1 == 1 {
            acc = acc.mul(&majorana_pauli(mu, n));
        }
    }
    acc
}

/// Vacuum two-point matrix `H_{μν} = <0|c_μ c_ν|0>`.
pub fn vacuum_contraction(n: usize) -> Vec<Vec<C64>> {
    let mut h = vec![vec![ZERO; 2 * n]; 2 * n];
    for k in 0..n {
        h[2 * k][2 * k] = ONE;
        h[2 * k + 1][2 * k + 1] = ONE;
        h[2 * k][2 * k + 1] = I;
        h[2 * k + 1][2 * k] = -I;
    }
    h
}

/// Dense `2n × 2n` real orthogonal matrix with `U c_μ U† = Σ_ν R_{μν} c_ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl RotationMatrix {
    pub fn identity(n: usize) -> Self {
        let dim = 2 * n;
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        RotationMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.data[mu * self.dim + nu]
    }

    /// Max-abs deviation of `R Rᵀ` from the identity.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let s: f64 = (0..d).map(|k| self.get(i, k) * self.get(j, k)).sum();
                r = r.max((s - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        r
    }

    /// `self ← self · R_g` where `R_g` is the local block on columns `2ℓ..2ℓ+4`.
    fn right_apply(&mut self, line: usize, block: &[[f64; 4]; 4]) {
        let d = self.dim;
        let base = 2 * line;
        for row in 0..d {
            let r = &mut self.data[row * d + base..row * d + base + 4];
            let old = [r[0], r[1], r[2], r[3]];
            for (j, out) in r.iter_mut().enumerate() {
                *out = old[0] * block[0][j] + old[1] * block[1][j] + old[2] * block[2][j] + old[3] * block[3][j];
            }
        }
    }

    /// `self ← R_g · self`, touching rows `2ℓ..2ℓ+4`.
    fn left_apply(&mut self, line: usize, block: &[[f64; 4]; 4]) {
        let d = self.dim;
        let base = 2 * line;
        for col in 0..d {
            let old: [f64; 4] = std::array::from_fn(|k| self.data[(base + k) * d + col]);
            for i in 0..4 {
                self.data[(base + i) * d + col] = (0..4).map(|k| block[i][k] * old[k]).sum();
            }
        }
    }
}

/// The four Majoranas of lines `ℓ, ℓ+1` with the Z-string prefix dropped.
fn local_majoranas() -> [Mat4; 4] {
    [
        kron2(&pauli_x(), &id2()),
        kron2(&pauli_y(), &id2()),
        kron2(&pauli_z(), &pauli_x()),
        kron2(&pauli_z(), &pauli_y()),
    ]
}

/// `R_{μν} = tr(G m_μ G† m_ν) / 4` over the local Majoranas.
pub fn local_rotation(g: &Matchgate) -> Result<[[f64; 4]; 4]> {
    let u = g.to_mat4();
    let ud = dagger4(&u);
    let m = local_majoranas();
    let mut block = [[0.0; 4]; 4];
    for mu in 0..4 {
        let conj = mul4(&u, &mul4(&m[mu], &ud));
        for nu in 0..4 {
            let p = mul4(&conj, &m[nu]);
            let tr: C64 = (0..4).map(|i| p[i][i]).sum::<C64>() / 4.0;
            if tr.im.abs() > 1e-10 {
                return Err(Error::NonRealResidual { residual: tr.im.abs() });
            }
            block[mu][nu] = tr.re;
        }
    }
    Ok(block)
}

pub fn gate_rotation(g: &Matchgate, line: usize, n: usize) -> Result<RotationMatrix> {
    assert!(line + 1 < n, "gate line out of range");
    let mut r = RotationMatrix::identity(n);
    r.right_apply(line, &local_rotation(g)?);
    Ok(r)
}

/// How per-gate rotations combine for `U = U_m … U_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Composition {
    /// `R(U_1) · R(U_2) ⋯ R(U_m)`, the order implied by `U c U† = Σ R c`.
    Forward,
    /// `R(U_m) ⋯ R(U_1)`; kept only so tests can show it disagrees with the oracle.
    Reverse,
}

pub const COMPOSITION: Composition = Composition::Forward;

pub fn segment_rotation(gates: &[(usize, Matchgate)], n: usize) -> Result<RotationMatrix> {
    let mut r = RotationMatrix::identity(n);
    extend_rotation(&mut r, gates, COMPOSITION)?;
    Ok(r)
}

/// Appends gates (in time order) to an accumulated rotation.
pub fn extend_rotation(r: &mut RotationMatrix, gates: &[(usize, Matchgate)], order: Composition) -> Result<()> {
    for (line, g) in gates {
        let block = local_rotation(g)?;
        match order {
            Composition::Forward => r.right_apply(*line, &block),
            Composition::Reverse => r.left_apply(*line, &block),
        }
    }
    Ok(())
}

/// `T_{iμ}` with `U† a_i U = Σ_μ T_{iμ} c_μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TMatrix {
    n: usize,
    data: Vec<C64>,
}

impl TMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, mu: usize) -> C64 {
        self.data[i * 2 * self.n + mu]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * 2 * self.n..(i + 1) * 2 * self.n]
    }
}

pub fn t_from_r(r: &RotationMatrix) -> TMatrix {
    let n = r.dim / 2;
    let mut data = vec![ZERO; n * 2 * n];
    for i in 0..n {
        for mu in 0..2 * n {
            data[i * 2 * n + mu] = c(0.5 * r.get(mu, 2 * i), 0.5 * r.get(mu, 2 * i + 1));
        }
    }
    TMatrix { n, data }
}

/// `<ψ|P|ψ>` for a product of blocks, each contracted densely.
pub fn expectation_pauli(ps: &PauliString, input: &InputSpec, block_cap: usize) -> Result<C64> {
    assert_eq!(ps.letters.len(), input.n());
    let mut acc = ps.phase_value();
    for (block, off) in input.blocks().iter().zip(input.offsets()) {
        let letters = &ps.letters[off..off + block.width()];
        let v = match block {
            Block::Bits(bits) => {
                let mut v = ONE;
                for (l, b) in letters.iter().zip(bits) {
                    match l {
                        Pauli::I => {}
                        Pauli::Z => {
                            if *b == 1 {
                                v = -v
                            }
                        }
                        _ => {
                            v = ZERO;
                            break;
                        }
                    }
                }
                v
            }
            Block::Product(states) => letters.iter().zip(states).map(|(l, s)| single_expectation(*l, s)).product(),
            _ => {
                if block.width() > block_cap {
                    return Err(Error::BlockTooLarge { width: block.width(), cap: block_cap });
                }
                let amps = block.entangled_amplitudes().unwrap();
                dense_expectation(letters, &amps)
            }
        };
        acc *= v;
        if acc == ZERO {
            break;
        }
    }
    Ok(acc)
}

fn single_expectation(l: Pauli, s: &[C64; 2]) -> C64 {
    let m = l.matrix();
    let ms = [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]];
    s[0].conj() * ms[0] + s[1].conj() * ms[1]
}

/// `Σ_b conj(ψ[b ⊕ x]) · phase(b) · ψ[b]` with the block's first line as MSB.
fn dense_expectation(letters: &[Pauli], amps: &[C64]) -> C64 {
    let k = letters.len();
    let mut flip = 0usize;
    for (j, l) in letters.iter().enumerate() {
        if matches!(l, Pauli::X | Pauli::Y) {
            flip |= 1 << (k - 1 - j);
        }
    }
    let mut acc = ZERO;
    for (b, a) in amps.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        let target = amps[b ^ flip];
        if target == ZERO {
            continue;
        }
        let mut ph = ONE;
        for (j, l) in letters.iter().enumerate() {
            let bit = b >> (k - 1 - j) & 1;
            match l {
                Pauli::Z if bit == 1 => ph = -ph,
                Pauli::Y => ph *= if bit == 0 { I } else { -I },
                _ => {}
            }
        }
        acc += target.conj() * ph * a;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::MatchgateAngles;
    use proptest::prelude::*;

    #[test]
    fn first_majorana() {
        let p = majorana_pauli(0, 3);
        assert_eq!(p.letters, vec![Pauli::X, Pauli::I, Pauli::I]);
        assert_eq!(p.phase, 0);
        assert_eq!(majorana_pauli(5, 3).letters, vec![Pauli::Z, Pauli::Z, Pauli::Y]);
    }

    #[test]
    fn c0_c1_is_iz() {
        let p = pauli_product(&[majorana_pauli(0, 1), majorana_pauli(1, 1)]);
        assert_eq!(p.phase, 1);
        assert_eq!(p.letters, vec![Pauli::Z]);
    }

    #[test]
    fn squares_are_identity() {
        for mu in 0..8 {
            let c = majorana_pauli(mu, 4);
            assert_eq!(c.mul(&c), PauliString::identity(4));
        }
    }

    #[test]
    fn anticommutation() {
        let n = 4;
        for mu in 0..2 * n {
            for nu in 0..2 * n {
                if mu == nu {
                    continue;
                }
                let a = majorana_pauli(mu, n).mul(&majorana_pauli(nu, n));
                let b = majorana_pauli(nu, n).mul(&majorana_pauli(mu, n));
                assert_eq!(a.letters, b.letters);
                assert_eq!((a.phase + 2) & 3, b.phase);
            }
        }
    }

    #[test]
    fn single_letter_table_matches_matrices() {
        let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        for a in all {
            for b in all {
                let (k, p) = a.mul(b);
                let lhs = mul2(&a.matrix(), &b.matrix());
                let rhs = scale2(&p.matrix(), [ONE, I, -ONE, -I][k as usize]);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((lhs[i][j] - rhs[i][j]).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn vacuum_two_point_matches_h() {
        let n = 4;
        let h = vacuum_contraction(n);
        let zeros = InputSpec::zeros(n);
        for mu in 0..2 * n {
            for nu in 0..2 * n {
                let p = majorana_pauli(mu, n).mul(&majorana_pauli(nu, n));
                let e = expectation_pauli(&p, &zeros, 12).unwrap();
                assert!((e - h[mu][nu]).norm() < 1e-15, "{mu} {nu}");
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let id = PauliString::identity(3);
        let spec = InputSpec::new(vec![Block::Magic.clone(), Block::Bits(vec![1])]).unwrap();
        assert!((expectation_pauli(&PauliString::identity(5), &spec, 12).unwrap() - ONE).norm() < 1e-15);
        assert!((expectation_pauli(&id, &InputSpec::zeros(3), 12).unwrap() - ONE).norm() < 1e-15);
        let z1 = PauliString { phase: 0, letters: vec![Pauli::Z, Pauli::I, Pauli::I] };
        assert_eq!(expectation_pauli(&z1, &InputSpec::zeros(3), 12).unwrap(), ONE);
        assert_eq!(expectation_pauli(&z1, &InputSpec::bits(&[1, 0, 0]), 12).unwrap(), -ONE);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = InputSpec::new(vec![Block::Entangled { k: 2, amps: vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)] }]).unwrap();
        let xx = PauliString { phase: 0, letters: vec![Pauli::X, Pauli::X] };
        assert!((expectation_pauli(&xx, &bell, 12).unwrap() - ONE).norm() < 1e-15);
        let yy = PauliString { phase: 0, letters: vec![Pauli::Y, Pauli::Y] };
        assert!((expectation_pauli(&yy, &bell, 12).unwrap() + ONE).norm() < 1e-15);
        assert!(matches!(expectation_pauli(&xx, &bell, 1), Err(Error::BlockTooLarge { width: 2, cap: 1 })));
    }

    #[test]
    fn identity_gate_identity_rotation() {
        let r = gate_rotation(&Matchgate::identity(), 0, 2).unwrap();
        assert_eq!(r, RotationMatrix::identity(2));
    }

    #[test]
    fn fswap_rotation_swaps_modes() {
        let r = gate_rotation(&Matchgate::fswap(), 0, 2).unwrap();
        // Dense conjugation gives c0 → c2, c1 → c3, c2 → c0, c3 → c1 with no signs
        // once the Jordan–Wigner strings are accounted for.
        let expect = [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        for mu in 0..4 {
            for nu in 0..4 {
                assert!((r.get(mu, nu) - expect[mu][nu]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn empty_segment_t() {
        let t = t_from_r(&RotationMatrix::identity(3));
        for i in 0..3 {
            for mu in 0..6 {
                let e = if mu == 2 * i { c(0.5, 0.0) } else if mu == 2 * i + 1 { c(0.0, 0.5) } else { ZERO };
                assert_eq!(t.get(i, mu), e);
            }
        }
    }

    #[test]
    fn double_fswap_is_identity() {
        let r = segment_rotation(&[(1, Matchgate::fswap()), (1, Matchgate::fswap())], 3).unwrap();
        let id = RotationMatrix::identity(3);
        for i in 0..6 {
            for j in 0..6 {
                assert!((r.get(i, j) - id.get(i, j)).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn random_gate_rotation_orthogonal(v in proptest::array::uniform6(-7.0f64..7.0), line in 0usize..3) {
            let g = Matchgate::from_angles(MatchgateAngles::from_array(v));
            let r = gate_rotation(&g, line, 4).unwrap();
            prop_assert!(r.orthogonality_residual() < 1e-10);
        }
    }
}

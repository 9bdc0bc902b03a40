use crate::error::{Error, Result};
use crate::linalg::*;

const UNITARY_TOL: f64 = 1e-10;

/// Two-qubit gate `G(A, B)`: `a` acts on span{|00>, |11>}, `b` on span{|01>, |10>}.
///
/// In the 4×4 form the upper line is the more significant index bit, so
/// `a` occupies rows/columns {0, 3} and `b` rows/columns {1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct Matchgate {
    a: Mat2,
    b: Mat2,
    angles: Option<MatchgateAngles>,
}

/// Parameters of `(e^{iφ3 Z} ⊗ e^{iφ4 Z}) e^{i(α XX + β YY)} (e^{iφ1 Z} ⊗ e^{iφ2 Z})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchgateAngles {
    pub alpha: f64,
    pub beta: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
}

impl MatchgateAngles {
    pub fn new(alpha: f64, beta: f64, phi1: f64, phi2: f64, phi3: f64, phi4: f64) -> Self {
        MatchgateAngles { alpha, beta, phi1, phi2, phi3, phi4 }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.alpha, self.beta, self.phi1, self.phi2, self.phi3, self.phi4]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        MatchgateAngles::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    /// The angle-form product as a dense 4×4 matrix.
    pub fn to_mat4(&self) -> Mat4 {
        let ez = |p: f64| [[C64::from_polar(1.0, p), ZERO], [ZERO, C64::from_polar(1.0, -p)]];
        let xx = kron2(&pauli_x(), &pauli_x());
        let yy = kron2(&pauli_y(), &pauli_y());
        let rot = |theta: f64, p: &Mat4| {
            let mut m = id4();
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = m[i][j] * theta.cos() + I * theta.sin() * p[i][j];
                }
            }
            m
        };
        let middle = mul4(&rot(self.alpha, &xx), &rot(self.beta, &yy));
        let before = kron2(&ez(self.phi1), &ez(self.phi2));
        let after = kron2(&ez(self.phi3), &ez(self.phi4));
        mul4(&after, &mul4(&middle, &before))
    }
}

impl Matchgate {
    /// Validates unitarity of both blocks and `det a = det b`.
    pub fn from_components(a: Mat2, b: Mat2) -> Result<Self> {
        if a.iter().flatten().chain(b.iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("finite", "matchgate entries must be finite"));
        }
        let residual = unitarity_residual2(&a).max(unitarity_residual2(&b));
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        let residual = (det2(&a) - det2(&b)).norm();
        if residual > UNITARY_TOL {
            return Err(Error::DeterminantMismatch { residual });
        }
        Ok(Matchgate { a, b, angles: None })
    }

    pub fn from_angles(angles: MatchgateAngles) -> Self {
        let m = angles.to_mat4();
        let (a, b) = split_blocks(&m);
        Matchgate { a, b, angles: Some(angles) }
    }

    /// Accepts a parity-preserving 4×4 matrix and validates its blocks.
    pub fn from_mat4(m: &Mat4) -> Result<Self> {
        let mut off: f64 = 0.0;
        for i in 0..4usize {
            for j in 0..4usize {
                if (i.count_ones() + j.count_ones()) % 2 == 1 {
                    off = off.max(m[i][j].norm());
                }
            }
        }
        if off > UNITARY_TOL {
            return Err(Error::validation("parity-preserving", format!("off-block residual {off:e}")));
        }
        let (a, b) = split_blocks(m);
        Matchgate::from_components(a, b)
    }

    pub fn a(&self) -> &Mat2 {
        &self.a
    }
    pub fn b(&self) -> &Mat2 {
        &self.b
    }
    pub fn angles(&self) -> Option<&MatchgateAngles> {
        self.angles.as_ref()
    }

    /// Drops the angle form, so the gate serializes as a matrix.
    pub fn without_angles(mut self) -> Self {
        self.angles = None;
        self
    }

    pub fn to_mat4(&self) -> Mat4 {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = self.a[0][0];
        m[0][3] = self.a[0][1];
        m[3][0] = self.a[1][0];
        m[3][3] = self.a[1][1];
        m[1][1] = self.b[0][0];
        m[1][2] = self.b[0][1];
        m[2][1] = self.b[1][0];
        m[2][2] = self.b[1][1];
        m
    }

    pub fn dagger(&self) -> Matchgate {
        Matchgate { a: dagger2(&self.a), b: dagger2(&self.b), angles: None }
    }

    /// Equality up to a global phase, with max-abs tolerance.
    pub fn approx_eq_up_to_phase(&self, other: &Matchgate, tol: f64) -> bool {
        let x = self.to_mat4();
        let y = other.to_mat4();
        let ov: C64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| x[i][j].conj() * y[i][j]).sum();
        if ov.norm() < 1e-12 {
            return false;
        }
        let ph = ov / ov.norm();
        (0..4).all(|i| (0..4).all(|j| (x[i][j] * ph - y[i][j]).norm() <= tol))
    }

    pub fn identity() -> Self {
        Matchgate { a: id2(), b: id2(), angles: None }
    }

    /// fSWAP = G(Z, X).
    pub fn fswap() -> Self {
        Matchgate { a: pauli_z(), b: pauli_x(), angles: None }
    }

    /// G(−Z, X): swaps a |1> line past a neighbour without the fermionic sign.
    pub fn fswap_odd() -> Self {
        Matchgate { a: scale2(&pauli_z(), -ONE), b: pauli_x(), angles: None }
    }

    /// G(H, H), the Hadamard gadget with the target on the upper line.
    pub fn hadamard_gadget() -> Self {
        Matchgate { a: hadamard(), b: hadamard(), angles: None }
    }

    /// G(H, XHX), the Hadamard gadget with the target on the lower line.
    pub fn hadamard_gadget_lower() -> Self {
        let xhx = mul2(&pauli_x(), &mul2(&hadamard(), &pauli_x()));
        Matchgate { a: hadamard(), b: xhx, angles: None }
    }

    /// X ⊗ X = G(X, X).
    pub fn xx() -> Self {
        Matchgate { a: pauli_x(), b: pauli_x(), angles: None }
    }

    /// `e^{iφ Z}` on the upper line.
    pub fn phase_upper(phi: f64) -> Self {
        Matchgate::from_angles(MatchgateAngles::new(0.0, 0.0, phi, 0.0, 0.0, 0.0))
    }

    /// `e^{iφ Z}` on the lower line.
    pub fn phase_lower(phi: f64) -> Self {
        Matchgate::from_angles(MatchgateAngles::new(0.0, 0.0, 0.0, phi, 0.0, 0.0))
    }

    /// `e^{iθ XX}`.
    pub fn xx_rotation(theta: f64) -> Self {
        Matchgate::from_angles(MatchgateAngles::new(theta, 0.0, 0.0, 0.0, 0.0, 0.0))
    }
}

fn split_blocks(m: &Mat4) -> (Mat2, Mat2) {
    ([[m[0][0], m[0][3]], [m[3][0], m[3][3]]], [[m[1][1], m[1][2]], [m[2][1], m[2][2]]])
}

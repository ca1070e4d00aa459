//! Small dense matrices for one- and two-qubit gates and ZSX Euler synthesis.
//!
//! Two-qubit matrices use the gate's first operand as the most significant
//! bit of the basis index.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64 as C;

use crate::circuit::{Gate, GateKind, ANGLE_TOL};

pub type Mat2 = [[C; 2]; 2];
pub type Mat4 = [[C; 4]; 4];

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn identity4() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn rz(theta: f64) -> Mat2 {
    [[C::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, C::from_polar(1.0, theta / 2.0)]]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]]
}

/// Matrix of a one-qubit unitary gate; `None` for non-unitary or two-qubit kinds.
pub fn single_qubit_matrix(g: &Gate) -> Option<Mat2> {
    let h = FRAC_1_SQRT_2;
    Some(match g.kind() {
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Sx => [
            [C::new(0.5, 0.5), C::new(0.5, -0.5)],
            [C::new(0.5, -0.5), C::new(0.5, 0.5)],
        ],
        GateKind::H => [[C::new(h, 0.0), C::new(h, 0.0)], [C::new(h, 0.0), C::new(-h, 0.0)]],
        GateKind::Rz => rz(g.param()?),
        GateKind::Ry => ry(g.param()?),
        _ => return None,
    })
}

/// Matrix of a two-qubit unitary gate in its own operand order.
pub fn two_qubit_matrix(g: &Gate) -> Option<Mat4> {
    let mut m = [[ZERO; 4]; 4];
    match g.kind() {
        GateKind::Cx => {
            m[0][0] = ONE;
            m[1][1] = ONE;
            m[2][3] = ONE;
            m[3][2] = ONE;
        }
        GateKind::Cz => {
            m = identity4();
            m[3][3] = -ONE;
        }
        GateKind::Swap => {
            m[0][0] = ONE;
            m[1][2] = ONE;
            m[2][1] = ONE;
            m[3][3] = ONE;
        }
        GateKind::Rzz => {
            let t = g.param()?;
            let (a, b) = (C::from_polar(1.0, -t / 2.0), C::from_polar(1.0, t / 2.0));
            m[0][0] = a;
            m[1][1] = b;
            m[2][2] = b;
            m[3][3] = a;
        }
        _ => return None,
    }
    Some(m)
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

/// Lifts a one-qubit matrix onto slot 0 (most significant) or 1 of a pair.
pub fn embed(m: &Mat2, slot: usize) -> Mat4 {
    let mut r = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let (hi_i, lo_i, hi_j, lo_j) = (i >> 1, i & 1, j >> 1, j & 1);
            r[i][j] = if slot == 0 {
                if lo_i == lo_j {
                    m[hi_i][hi_j]
                } else {
                    ZERO
                }
            } else if hi_i == hi_j {
                m[lo_i][lo_j]
            } else {
                ZERO
            };
        }
    }
    r
}

/// Product of a gate list acting on the ordered pair `(a, b)`.
/// Returns `None` if a gate touches anything else or is not unitary.
pub fn pair_unitary(gates: &[Gate], a: u32, b: u32) -> Option<Mat4> {
    let mut acc = identity4();
    for g in gates {
        let step = match g.qubits() {
            &[q] => {
                let slot = if q == a {
                    0
                } else if q == b {
                    1
                } else {
                    return None;
                };
                embed(&single_qubit_matrix(g)?, slot)
            }
            &[x, y] => {
                let m = two_qubit_matrix(g)?;
                if (x, y) == (a, b) {
                    m
                } else if (x, y) == (b, a) {
                    let sw = two_qubit_matrix(&Gate::swap(0, 1))?;
                    mul4(&sw, &mul4(&m, &sw))
                } else {
                    return None;
                }
            }
            _ => return None,
        };
        acc = mul4(&step, &acc);
    }
    Some(acc)
}

/// Product of a one-qubit gate run, in circuit order.
pub fn run_unitary<'a>(gates: impl IntoIterator<Item = &'a Gate>) -> Option<Mat2> {
    let mut acc = identity2();
    for g in gates {
        acc = mul2(&single_qubit_matrix(g)?, &acc);
    }
    Some(acc)
}

fn phase_aligned_distance<const N: usize>(a: &[[C; N]; N], b: &[[C; N]; N]) -> f64 {
    // Align on the overlap ⟨a, b⟩ and measure the residual.
    let mut overlap = ZERO;
    for i in 0..N {
        for j in 0..N {
            overlap += a[i][j].conj() * b[i][j];
        }
    }
    let phase = if overlap.norm() < 1e-300 { ONE } else { overlap / overlap.norm() };
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((a[i][j] * phase - b[i][j]).norm());
        }
    }
    worst
}

pub fn equal_up_to_phase2(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    phase_aligned_distance(a, b) <= tol
}

pub fn equal_up_to_phase4(a: &Mat4, b: &Mat4, tol: f64) -> bool {
    phase_aligned_distance(a, b) <= tol
}

pub fn is_identity_up_to_phase(m: &Mat2, tol: f64) -> bool {
    equal_up_to_phase2(m, &identity2(), tol)
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

pub fn is_zero_angle(theta: f64) -> bool {
    normalize_angle(theta).abs() <= ANGLE_TOL
}

/// `(θ, φ, λ)` with `m ≅ Rz(φ)·Ry(θ)·Rz(λ)` up to global phase, θ ∈ [0, π].
pub fn zyz_angles(m: &Mat2) -> (f64, f64, f64) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let theta = 2.0 * c.norm().atan2(a.norm());
    let eps = 1e-12;
    if c.norm() < eps {
        // Diagonal: only φ+λ is meaningful.
        return (0.0, 0.0, d.arg() - a.arg());
    }
    if a.norm() < eps {
        let gamma = (-b).arg();
        return (theta, c.arg() - gamma, 0.0);
    }
    let gamma = a.arg();
    let phi = c.arg() - gamma;
    let lam = (-b).arg() - gamma;
    (theta, phi, lam)
}

/// Shortest native sequence (X, SX, Rz) realising `m` on qubit `q` up to
/// global phase: nothing, one Rz, Rz·SX·Rz, Rz·X·Rz, or the general
/// Rz·SX·Rz·SX·Rz form. Zero-angle Rz gates are omitted.
pub fn synthesize_1q(m: &Mat2, q: u32) -> Vec<Gate> {
    let (theta, phi, lam) = zyz_angles(m);
    let mut out = Vec::with_capacity(5);
    let push_rz = |out: &mut Vec<Gate>, t: f64| {
        if !is_zero_angle(t) {
            out.push(Gate::rz(normalize_angle(t), q));
        }
    };
    if theta.abs() <= ANGLE_TOL {
        push_rz(&mut out, phi + lam);
    } else if (theta - FRAC_PI_2).abs() <= ANGLE_TOL {
        push_rz(&mut out, lam - FRAC_PI_2);
        out.push(Gate::sx(q));
        push_rz(&mut out, phi + FRAC_PI_2);
    } else if (theta - PI).abs() <= ANGLE_TOL {
        push_rz(&mut out, lam - FRAC_PI_2);
        out.push(Gate::x(q));
        push_rz(&mut out, phi + FRAC_PI_2);
    } else {
        push_rz(&mut out, lam);
        out.push(Gate::sx(q));
        push_rz(&mut out, theta + PI);
        out.push(Gate::sx(q));
        push_rz(&mut out, phi + PI);
    }
    out
}

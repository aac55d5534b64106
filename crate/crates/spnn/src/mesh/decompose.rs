//! Triangular and rectangular nulling decompositions.
//!
//! Both algorithms zero matrix entries with two-mode rotations of the same
//! form as the physical MZI, so the recovered theta always lands in [0, pi]
//! and phi in [0, 2*pi) without any post-hoc folding. Degenerate ratios
//! resolve to the bar state (theta = pi), the lower-crosstalk setting.

use super::{MeshKind, PhaseProgram, PlacedMzi};
use crate::device::PhasePair;
use crate::{CMatrix, Complex, Result};
use std::f64::consts::PI;

/// An (m, theta, phi) rotation emitted by the nulling passes.
#[derive(Debug, Clone, Copy)]
struct Op {
    m: usize,
    theta: f64,
    phi: f64,
}

fn wrap_phi(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p < 0.0 {
        p += 2.0 * PI;
    }
    p
}

/// Angles from the target ratio `tan(theta/2) * e^{i phi} = z`.
fn angles_from_ratio(z: Complex) -> (f64, f64) {
    let theta = 2.0 * z.norm().atan();
    let phi = wrap_phi(z.arg());
    (theta, phi)
}

/// The 2x2 MZI block for given angles.
fn block(theta: f64, phi: f64) -> [[Complex; 2]; 2] {
    let s = (theta / 2.0).sin();
    let c = (theta / 2.0).cos();
    let pref = Complex::i() * Complex::from_polar(1.0, theta / 2.0);
    let e_phi = Complex::from_polar(1.0, phi);
    [
        [pref * s * e_phi, pref * c],
        [pref * c * e_phi, pref * (-s)],
    ]
}

fn block_dagger(theta: f64, phi: f64) -> [[Complex; 2]; 2] {
    let b = block(theta, phi);
    [[b[0][0].conj(), b[1][0].conj()], [b[0][1].conj(), b[1][1].conj()]]
}

/// Right-multiply `v` by T^dagger on columns (m, m+1) so that v[r][m] = 0.
fn right_null(v: &mut CMatrix, r: usize, m: usize) -> Op {
    let a = v[(r, m)];
    let b = v[(r, m + 1)];
    let (theta, phi) = if a.norm() < 1e-14 {
        (PI, 0.0)
    } else {
        angles_from_ratio(-b / a)
    };
    let td = block_dagger(theta, phi);
    for row in 0..v.nrows() {
        let x = v[(row, m)];
        let y = v[(row, m + 1)];
        v[(row, m)] = x * td[0][0] + y * td[1][0];
        v[(row, m + 1)] = x * td[0][1] + y * td[1][1];
    }
    Op { m, theta, phi }
}

/// Left-multiply `v` by T on rows (m, m+1) so that v[m+1][c] = 0.
fn left_null(v: &mut CMatrix, lower_row: usize, c: usize) -> Op {
    let m = lower_row - 1;
    let a = v[(m, c)];
    let b = v[(lower_row, c)];
    let (theta, phi) = if b.norm() < 1e-14 {
        (PI, 0.0)
    } else {
        let z = a / b;
        (2.0 * z.norm().atan(), wrap_phi(-z.arg()))
    };
    let t = block(theta, phi);
    for col in 0..v.ncols() {
        let x = v[(m, col)];
        let y = v[(lower_row, col)];
        v[(m, col)] = t[0][0] * x + t[0][1] * y;
        v[(lower_row, col)] = t[1][0] * x + t[1][1] * y;
    }
    Op { m, theta, phi }
}

/// Assign physical columns: each placement takes the earliest column after
/// every earlier placement it shares a port with.
fn schedule(ops: &[Op], width: usize) -> Vec<usize> {
    let mut last = vec![0usize; width];
    let mut cols = Vec::with_capacity(ops.len());
    for op in ops {
        let c = last[op.m].max(last[op.m + 1]) + 1;
        cols.push(c);
        last[op.m] = c;
        last[op.m + 1] = c;
    }
    cols
}

fn to_program(kind: MeshKind, n: usize, ops: Vec<Op>, diag: Vec<Complex>) -> PhaseProgram {
    let width = kind.width(n);
    let cols = schedule(&ops, width);
    let mut placements: Vec<PlacedMzi> = ops
        .iter()
        .zip(cols)
        .map(|(op, column)| PlacedMzi {
            column,
            m: op.m,
            phases: PhasePair { theta: op.theta, phi: op.phi },
        })
        .collect();
    placements.sort_by_key(|p| (p.column, p.m));
    PhaseProgram { kind, width, logical_n: n, placements, diag }
}

/// Triangular (Reck) decomposition: null the rows bottom-up with
/// right-rotations only; residual phases land on the output diagonal.
pub(super) fn reck(u: &CMatrix) -> Result<PhaseProgram> {
    let n = u.nrows();
    let mut v = u.clone();
    let mut ops = Vec::with_capacity(n * (n - 1) / 2);
    for r in (1..n).rev() {
        for c in 0..r {
            ops.push(right_null(&mut v, r, c));
        }
    }
    let diag: Vec<Complex> = (0..n).map(|i| normalize_phase(v[(i, i)])).collect();
    Ok(to_program(MeshKind::Reck, n, ops, diag))
}

/// Rectangular (Clements) decomposition: alternate right- and left-nulling
/// along anti-diagonals, then commute the left rotations through the
/// residual diagonal into mesh order.
pub(super) fn clements(u: &CMatrix) -> Result<PhaseProgram> {
    let n = u.nrows();
    let mut v = u.clone();
    let mut right_ops: Vec<Op> = Vec::new();
    let mut left_ops: Vec<Op> = Vec::new();
    for i in 1..n {
        if i % 2 == 1 {
            for j in 0..i {
                let r = n - 1 - j;
                let c = i - 1 - j;
                right_ops.push(right_null(&mut v, r, c));
            }
        } else {
            for j in 1..=i {
                let lower = n - i + j - 1;
                let c = j - 1;
                left_ops.push(left_null(&mut v, lower, c));
            }
        }
    }
    let mut diag: Vec<Complex> = (0..n).map(|i| normalize_phase(v[(i, i)])).collect();
    // T^dagger(theta, phi) * D = D' * T(theta, phi') with
    //   phi'   = arg(d_m) - arg(d_n)
    //   d_m'   = -e^{-i(theta+phi)} d_n
    //   d_n'   = -e^{-i theta} d_n
    let mut pushed: Vec<Op> = Vec::with_capacity(left_ops.len());
    for op in left_ops.iter().rev() {
        let d_m = diag[op.m];
        let d_n = diag[op.m + 1];
        let phi2 = wrap_phi(d_m.arg() - d_n.arg());
        diag[op.m] = -Complex::from_polar(1.0, -(op.theta + op.phi)) * d_n;
        diag[op.m + 1] = -Complex::from_polar(1.0, -op.theta) * d_n;
        pushed.push(Op { m: op.m, theta: op.theta, phi: phi2 });
    }
    let mut ops = right_ops;
    ops.extend(pushed);
    Ok(to_program(MeshKind::Clements, n, ops, diag))
}

/// Diamond decomposition: embed the Reck program in the diamond layout
/// (ports shifted down by N-2) and fix the remaining MZIs to the bar state.
pub(super) fn diamond(u: &CMatrix) -> Result<PhaseProgram> {
    let n = u.nrows();
    let reck_prog = reck(u)?;
    let width = MeshKind::Diamond.width(n);
    let shift = n - 2;
    let mut occupied: std::collections::HashMap<(usize, usize), PhasePair> =
        std::collections::HashMap::new();
    for p in &reck_prog.placements {
        occupied.insert((p.column, p.m + shift), p.phases);
    }
    let mut placements = Vec::with_capacity(MeshKind::Diamond.mzi_count(n));
    for (column, m) in diamond_grid(n) {
        let phases = occupied.remove(&(column, m)).unwrap_or(PhasePair::BAR);
        placements.push(PlacedMzi { column, m, phases });
    }
    debug_assert!(occupied.is_empty(), "embedded Reck positions must lie on the grid");
    let mut diag = vec![Complex::new(1.0, 0.0); width];
    diag[shift..].copy_from_slice(&reck_prog.diag);
    Ok(PhaseProgram {
        kind: MeshKind::Diamond,
        width,
        logical_n: n,
        placements,
        diag,
    })
}

/// Rhombus grid positions (column, upper-port) for a diamond mesh of N
/// logical inputs: 2N-3 columns whose occupancy grows from 1 MZI at the
/// edges to N-1 at the center column.
fn diamond_grid(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for c in 1..=(2 * n - 3) {
        let k = c.abs_diff(n - 1);
        let mut m = k; // 0-indexed upper port of the top MZI in this column
        while m + 1 < 2 * n - 2 - k {
            out.push((c, m));
            m += 2;
        }
    }
    out.sort_unstable();
    out
}

fn normalize_phase(z: Complex) -> Complex {
    let r = z.norm();
    if r > 1e-14 {
        z / r
    } else {
        Complex::new(1.0, 0.0)
    }
}

/// Zero-phase layouts matching each kind's canonical geometry.
pub(super) fn layout(kind: MeshKind, n: usize) -> Result<PhaseProgram> {
    let zero = PhasePair { theta: 0.0, phi: 0.0 };
    let ops: Vec<Op> = match kind {
        MeshKind::Reck => {
            let mut ops = Vec::new();
            for r in (1..n).rev() {
                for c in 0..r {
                    ops.push(Op { m: c, theta: 0.0, phi: 0.0 });
                }
            }
            ops
        }
        MeshKind::Clements => {
            let mut rights = Vec::new();
            let mut lefts = Vec::new();
            for i in 1..n {
                if i % 2 == 1 {
                    for j in 0..i {
                        rights.push(Op { m: i - 1 - j, theta: 0.0, phi: 0.0 });
                    }
                } else {
                    for j in 1..=i {
                        lefts.push(Op { m: n - i + j - 2, theta: 0.0, phi: 0.0 });
                    }
                }
            }
            rights.extend(lefts.into_iter().rev());
            rights
        }
        MeshKind::Diamond => {
            let width = kind.width(n);
            let placements = diamond_grid(n)
                .into_iter()
                .map(|(column, m)| PlacedMzi { column, m, phases: zero })
                .collect();
            return Ok(PhaseProgram {
                kind,
                width,
                logical_n: n,
                placements,
                diag: vec![Complex::new(1.0, 0.0); width],
            });
        }
    };
    let diag = vec![Complex::new(1.0, 0.0); n];
    Ok(to_program(kind, n, ops, diag))
}

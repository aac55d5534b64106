//! Universal MZI meshes: layouts, unitary decomposition, reconstruction.
//!
//! A [`PhaseProgram`] is the complete description of one optical interference
//! unit: an ordered set of placed MZIs (light traverses columns in order)
//! plus a diagonal of output phases. Programs are produced either empty
//! ([`build_layout`]) or by decomposing a unitary ([`decompose`]); weight
//! matrices map onto two programs and a singular-value stage
//! ([`map_weights`]).

mod decompose;
mod svd;

pub use svd::{map_weights, SvdProgram};

use crate::device::{
    ideal_mzi, lossy_mzi, noisy_mzi_mixed, sample_crosstalk, CrosstalkModel, LossModel, Matrix2c,
    PhasePair, XtalkMix,
};
use crate::rng::SeededRng;
use crate::{CMatrix, Complex, Error, Result};
use serde::{Deserialize, Serialize};

/// Mesh configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Reck,
    Clements,
    Diamond,
}

impl MeshKind {
    pub const ALL: [MeshKind; 3] = [MeshKind::Reck, MeshKind::Clements, MeshKind::Diamond];

    /// Number of MZIs used for an N-input multiplier of this kind.
    pub fn mzi_count(self, n: usize) -> usize {
        match self {
            MeshKind::Reck | MeshKind::Clements => n * (n - 1) / 2,
            MeshKind::Diamond => (n - 1) * (n - 1),
        }
    }

    /// Physical port count of the mesh. Diamond carries 2N-2 ports of which
    /// only the last N are used for computation.
    pub fn width(self, n: usize) -> usize {
        match self {
            MeshKind::Reck | MeshKind::Clements => n,
            MeshKind::Diamond => 2 * n - 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshKind::Reck => "reck",
            MeshKind::Clements => "clements",
            MeshKind::Diamond => "diamond",
        }
    }
}

impl std::str::FromStr for MeshKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "reck" => Ok(MeshKind::Reck),
            "clements" => Ok(MeshKind::Clements),
            "diamond" => Ok(MeshKind::Diamond),
            other => Err(Error::invalid(format!("unknown mesh kind '{other}'"))),
        }
    }
}

/// One MZI placed in the mesh; it couples ports `m` and `m+1` and belongs to
/// physical column `column` (1-based, light traverses columns in order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedMzi {
    pub column: usize,
    pub m: usize,
    pub phases: PhasePair,
}

impl PlacedMzi {
    /// Lower port index; n = m + 1 always.
    pub fn n(&self) -> usize {
        self.m + 1
    }
}

/// A fully programmed OIU.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProgram {
    pub kind: MeshKind,
    /// Physical port count.
    pub width: usize,
    /// Number of usable (logical) inputs.
    pub logical_n: usize,
    /// Placements sorted by traversal order (column, then port).
    pub placements: Vec<PlacedMzi>,
    /// Output diagonal D, unit-modulus entries, one per physical port.
    pub diag: Vec<Complex>,
}

impl PhaseProgram {
    /// First logical port index (Diamond routes signals through the last N
    /// ports; Reck/Clements use all of them).
    pub fn logical_offset(&self) -> usize {
        self.width - self.logical_n
    }

    pub fn column_count(&self) -> usize {
        self.placements.iter().map(|p| p.column).max().unwrap_or(0)
    }

    /// Placements grouped per column, in traversal order.
    pub fn columns(&self) -> Vec<Vec<&PlacedMzi>> {
        let ncol = self.column_count();
        let mut cols: Vec<Vec<&PlacedMzi>> = vec![Vec::new(); ncol];
        for p in &self.placements {
            cols[p.column - 1].push(p);
        }
        cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.logical_n < 2 || self.logical_n > self.width {
            return Err(Error::invalid("program must have at least two logical ports"));
        }
        if self.placements.len() != self.kind.mzi_count(self.logical_n) {
            return Err(Error::invalid(format!(
                "{} mesh with n={} must hold {} MZIs, found {}",
                self.kind.name(),
                self.logical_n,
                self.kind.mzi_count(self.logical_n),
                self.placements.len()
            )));
        }
        if self.diag.len() != self.width {
            return Err(Error::invalid("diagonal length must match width"));
        }
        for d in &self.diag {
            if (d.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("diagonal entries must have unit modulus"));
            }
        }
        for p in &self.placements {
            if p.n() >= self.width {
                return Err(Error::invalid("placement outside mesh width"));
            }
        }
        Ok(())
    }

    /// Identity program of the same width (no MZIs, unit diagonal). Used for
    /// single-mesh layers where V^H is trivial.
    pub fn identity(n: usize) -> PhaseProgram {
        PhaseProgram {
            kind: MeshKind::Clements,
            width: n,
            logical_n: n,
            placements: Vec::new(),
            diag: vec![Complex::new(1.0, 0.0); n],
        }
    }
}

/// Mesh layout with all phases zeroed.
pub fn build_layout(kind: MeshKind, n: usize) -> Result<PhaseProgram> {
    if n < 2 {
        return Err(Error::invalid("mesh needs at least 2 ports"));
    }
    decompose::layout(kind, n)
}

/// Decompose a unitary into a phase program of the requested mesh kind.
pub fn decompose(u: &CMatrix, kind: MeshKind) -> Result<PhaseProgram> {
    if u.nrows() != u.ncols() || u.nrows() < 2 {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: u.ncols() });
    }
    crate::matrix::check_unitary(u, 1e-8)?;
    match kind {
        MeshKind::Reck => decompose::reck(u),
        MeshKind::Clements => decompose::clements(u),
        MeshKind::Diamond => decompose::diamond(u),
    }
}

/// How per-MZI matrices are realized during reconstruction.
pub enum ReconstructMode<'a> {
    Ideal,
    Lossy(&'a LossModel),
    Noisy {
        loss: &'a LossModel,
        crosstalk: &'a CrosstalkModel,
        rng: &'a mut SeededRng,
        mix: XtalkMix,
    },
}

/// Multiply the program's per-MZI blocks in column order and apply D.
///
/// Diamond programs return the logical NxN submatrix acting on the last N
/// ports; the calibration ports are traced out of the result.
pub fn reconstruct(prog: &PhaseProgram, mode: ReconstructMode<'_>) -> Result<CMatrix> {
    prog.validate()?;
    let w = prog.width;
    let mut mode = mode;
    let mut total = CMatrix::identity(w, w);
    for col in prog.columns() {
        let mut cmat = CMatrix::identity(w, w);
        for p in col {
            let blk = placement_matrix(p, &mut mode)?;
            embed(&mut cmat, p.m, &blk);
        }
        total = cmat * total;
    }
    for (i, d) in prog.diag.iter().enumerate() {
        for j in 0..w {
            total[(i, j)] *= d;
        }
    }
    let off = prog.logical_offset();
    Ok(total.view((off, off), (prog.logical_n, prog.logical_n)).into_owned())
}

fn placement_matrix(p: &PlacedMzi, mode: &mut ReconstructMode<'_>) -> Result<Matrix2c> {
    match mode {
        ReconstructMode::Ideal => Ok(ideal_mzi(p.phases)),
        ReconstructMode::Lossy(loss) => lossy_mzi(p.phases, loss),
        ReconstructMode::Noisy { loss, crosstalk, rng, mix } => {
            let x = sample_crosstalk(p.phases.theta, crosstalk, rng)?;
            noisy_mzi_mixed(p.phases, loss, x, *mix, Complex::new(1.0, 0.0))
        }
    }
}

fn embed(full: &mut CMatrix, m: usize, blk: &Matrix2c) {
    let w = full.ncols();
    for j in 0..w {
        let a = full[(m, j)];
        let b = full[(m + 1, j)];
        full[(m, j)] = blk[(0, 0)] * a + blk[(0, 1)] * b;
        full[(m + 1, j)] = blk[(1, 0)] * a + blk[(1, 1)] * b;
    }
}

// ---------------------------------------------------------------------------
// JSON wire format: {kind, n, placements:[{col,m,theta,phi}], diag:[{re,im}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ProgramJson {
    kind: MeshKind,
    n: usize,
    placements: Vec<PlacementJson>,
    diag: Vec<ComplexJson>,
}

#[derive(Serialize, Deserialize)]
struct PlacementJson {
    col: usize,
    m: usize,
    theta: f64,
    phi: f64,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

impl PhaseProgram {
    pub fn to_json(&self) -> Result<String> {
        let doc = ProgramJson {
            kind: self.kind,
            n: self.logical_n,
            placements: self
                .placements
                .iter()
                .map(|p| PlacementJson {
                    col: p.column,
                    m: p.m,
                    theta: p.phases.theta,
                    phi: p.phases.phi,
                })
                .collect(),
            diag: self.diag.iter().map(|d| ComplexJson { re: d.re, im: d.im }).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<PhaseProgram> {
        let doc: ProgramJson = serde_json::from_str(text)?;
        let width = doc.kind.width(doc.n);
        let placements = doc
            .placements
            .iter()
            .map(|p| {
                Ok(PlacedMzi {
                    column: p.col,
                    m: p.m,
                    phases: PhasePair::new(p.theta, p.phi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let prog = PhaseProgram {
            kind: doc.kind,
            width,
            logical_n: doc.n,
            placements,
            diag: doc.diag.iter().map(|c| Complex::new(c.re, c.im)).collect(),
        };
        prog.validate()?;
        Ok(prog)
    }
}

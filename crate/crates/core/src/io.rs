//! File formats: Matrix Market for matrices and vectors, JSON for subspaces
//! and decompositions, CSV for sweep output. Floats are written with 17
//! significant digits so that decimal round trips are exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decomposition::TridiagDecomp;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, DenseMatrix, Field, C64};
use crate::subspace::Subspace;

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmLayout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

pub fn write_matrix_market<W: Write>(mut w: W, m: &DenseMatrix, layout: MmLayout) -> Result<()> {
    let field = m.field();
    let fname = if field == Field::Real { "real" } else { "complex" };
    let entry = |z: C64| match field {
        Field::Real => fmt_f64(z.re),
        Field::Complex => format!("{} {}", fmt_f64(z.re), fmt_f64(z.im)),
    };
    let (rows, cols) = m.shape();
    match layout {
        MmLayout::Array => {
            writeln!(w, "%%MatrixMarket matrix array {fname} general")?;
            writeln!(w, "{rows} {cols}")?;
            for j in 0..cols {
                for i in 0..rows {
                    writeln!(w, "{}", entry(m[(i, j)]))?;
                }
            }
        }
        MmLayout::Coordinate => {
            let nz: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| m[(i, j)] != C64::new(0.0, 0.0))
                .collect();
            writeln!(w, "%%MatrixMarket matrix coordinate {fname} general")?;
            writeln!(w, "{rows} {cols} {}", nz.len())?;
            for (i, j) in nz {
                writeln!(w, "{} {} {}", i + 1, j + 1, entry(m[(i, j)]))?;
            }
        }
    }
    Ok(())
}

pub fn save_matrix_market(path: &Path, m: &DenseMatrix, layout: MmLayout) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(&mut w, m, layout)?;
    w.flush()?;
    Ok(())
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let t = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing value")))?;
    t.parse::<f64>().map_err(|_| Error::Parse(format!("line {line}: bad number '{t}'")))
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize> {
    let t = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing integer")))?;
    t.parse::<usize>().map_err(|_| Error::Parse(format!("line {line}: bad integer '{t}'")))
}

/// Reads coordinate or array files with real, integer, complex or pattern
/// entries and general, symmetric, Hermitian or skew-symmetric storage.
pub fn read_matrix_market<R: Read>(r: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty Matrix Market input".into()))?;
    let header = header?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(Error::Parse(format!("not a Matrix Market matrix header: '{header}'")));
    }
    let layout = match h[2].as_str() {
        "array" => MmLayout::Array,
        "coordinate" => MmLayout::Coordinate,
        other => return Err(Error::Parse(format!("unknown layout '{other}'"))),
    };
    let (complex, pattern) = match h[3].as_str() {
        "real" | "integer" | "double" => (false, false),
        "complex" => (true, false),
        "pattern" => (false, true),
        other => return Err(Error::Parse(format!("unknown field '{other}'"))),
    };
    let sym = match h[4].as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "hermitian" => MmSymmetry::Hermitian,
        "skew-symmetric" => MmSymmetry::Skew,
        other => return Err(Error::Parse(format!("unknown symmetry '{other}'"))),
    };
    if pattern && layout == MmLayout::Array {
        return Err(Error::Parse("pattern field needs coordinate layout".into()));
    }
    let mut body = lines.filter_map(|(i, l)| match l {
        Ok(s) => {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
        Err(e) => Some(Err(Error::from(e))),
    });
    let (sline, size) = body.next().ok_or_else(|| Error::Parse("missing size line".into()))??;
    let mut toks = size.split_whitespace();
    let rows = parse_usize(toks.next(), sline)?;
    let cols = parse_usize(toks.next(), sline)?;
    let mut m = CMat::zeros(rows, cols);
    let read_value = |toks: &mut std::str::SplitWhitespace<'_>, line: usize| -> Result<C64> {
        if pattern {
            return Ok(C64::new(1.0, 0.0));
        }
        let re = parse_f64(toks.next(), line)?;
        let im = if complex { parse_f64(toks.next(), line)? } else { 0.0 };
        Ok(C64::new(re, im))
    };
    let place = |m: &mut CMat, i: usize, j: usize, z: C64| {
        m[(i, j)] = z;
        if i != j {
            match sym {
                MmSymmetry::General => {}
                MmSymmetry::Symmetric => m[(j, i)] = z,
                MmSymmetry::Hermitian => m[(j, i)] = z.conj(),
                MmSymmetry::Skew => m[(j, i)] = -z,
            }
        }
    };
    match layout {
        MmLayout::Coordinate => {
            let nnz = parse_usize(toks.next(), sline)?;
            for _ in 0..nnz {
                let (line, text) = body.next().ok_or_else(|| Error::Parse("fewer entries than declared".into()))??;
                let mut t = text.split_whitespace();
                let i = parse_usize(t.next(), line)?;
                let j = parse_usize(t.next(), line)?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("line {line}: index ({i}, {j}) out of range")));
                }
                let z = read_value(&mut t, line)?;
                place(&mut m, i - 1, j - 1, z);
            }
        }
        MmLayout::Array => {
            for j in 0..cols {
                let start = match sym {
                    MmSymmetry::General => 0,
                    MmSymmetry::Skew => j + 1,
                    _ => j,
                };
                for i in start..rows {
                    let (line, text) =
                        body.next().ok_or_else(|| Error::Parse("fewer entries than declared".into()))??;
                    let z = read_value(&mut text.split_whitespace(), line)?;
                    place(&mut m, i, j, z);
                }
            }
        }
    }
    if sym != MmSymmetry::General && rows != cols {
        return Err(Error::Parse("symmetric storage needs a square matrix".into()));
    }
    let field = if complex { Field::Complex } else { Field::Real };
    DenseMatrix::with_field(m, field)
}

pub fn load_matrix_market(path: &Path) -> Result<DenseMatrix> {
    read_matrix_market(File::open(path)?)
}

/// A vector stored as an `n x 1` Matrix Market array (a `1 x n` file is
/// accepted too).
pub fn load_vector(path: &Path) -> Result<CVec> {
    let m = load_matrix_market(path)?;
    match m.shape() {
        (_, 1) => Ok(m.column(0).into_owned()),
        (1, _) => Ok(m.row(0).transpose()),
        (r, c) => Err(Error::Dimension(format!("expected a vector, got {r}x{c}"))),
    }
}

pub fn save_vector(path: &Path, v: &CVec) -> Result<()> {
    let m = CMat::from_column_slice(v.len(), 1, v.as_slice());
    save_matrix_market(path, &DenseMatrix::new(m), MmLayout::Array)
}

/// `{n, k, basis}` with `basis` the column-major list of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub n: usize,
    pub k: usize,
    pub basis: Vec<[f64; 2]>,
}

impl From<&Subspace> for SubspaceJson {
    fn from(s: &Subspace) -> Self {
        SubspaceJson {
            n: s.ambient_dim(),
            k: s.dim(),
            basis: s.basis().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl SubspaceJson {
    /// Columns that are not orthonormal are replaced by an orthonormal basis
    /// of their span.
    pub fn to_subspace(&self) -> Result<Subspace> {
        if self.basis.len() != self.n * self.k {
            return Err(Error::Parse(format!(
                "basis has {} entries, expected n*k = {}",
                self.basis.len(),
                self.n * self.k
            )));
        }
        let m = CMat::from_iterator(self.n, self.k, self.basis.iter().map(|&[a, b]| C64::new(a, b)));
        match Subspace::from_orthonormal(m.clone()) {
            Ok(s) => Ok(s),
            Err(_) => Ok(Subspace::span(&m)),
        }
    }
}

pub fn save_subspace(path: &Path, s: &Subspace) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, &SubspaceJson::from(s))?;
    Ok(())
}

pub fn load_subspace(path: &Path) -> Result<Subspace> {
    let j: SubspaceJson = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    j.to_subspace()
}

/// One block of a decomposition: its shape and Matrix Market text.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockJson {
    pub rows: usize,
    pub cols: usize,
    pub mtx: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub lambda_min: f64,
    pub norm2: f64,
    pub reconstruction_error: f64,
    pub blocks: Vec<(String, BlockJson)>,
}

fn block(name: &str, m: &CMat) -> Result<(String, BlockJson)> {
    let mut buf = Vec::new();
    write_matrix_market(&mut buf, &DenseMatrix::new(m.clone()), MmLayout::Array)?;
    let mtx = String::from_utf8(buf).map_err(|e| Error::Invalid(e.to_string()))?;
    Ok((name.to_string(), BlockJson { rows: m.nrows(), cols: m.ncols(), mtx }))
}

impl DecompositionJson {
    pub fn new(dec: &TridiagDecomp) -> Result<Self> {
        let blocks = [
            ("V", &dec.v),
            ("Vp", &dec.vp),
            ("Vpp", &dec.vpp),
            ("T", &dec.t),
            ("B", &dec.b),
            ("C", &dec.c),
            ("D", &dec.d),
            ("E", &dec.e),
        ]
        .iter()
        .map(|(n, m)| block(n, m))
        .collect::<Result<Vec<_>>>()?;
        Ok(DecompositionJson {
            n: dec.n(),
            p: dec.p(),
            q: dec.q(),
            r: dec.r(),
            lambda_min: dec.lambda_min,
            norm2: dec.norm2,
            reconstruction_error: dec.reconstruction_error(),
            blocks,
        })
    }

    pub fn block(&self, name: &str) -> Result<CMat> {
        let (_, b) = self
            .blocks
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Invalid(format!("no block named {name}")))?;
        let m = read_matrix_market(b.mtx.as_bytes())?.into_matrix();
        if m.shape() != (b.rows, b.cols) {
            return Err(Error::Parse(format!("block {name} shape mismatch")));
        }
        Ok(m)
    }
}

pub fn save_decomposition(path: &Path, dec: &TridiagDecomp) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(w, &DecompositionJson::new(dec)?)?;
    Ok(())
}

/// `index, sigma, sigma_ratio`.
pub fn write_sigma_csv<W: Write>(w: W, sigma: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["index", "sigma", "sigma_ratio"])?;
    let s1 = sigma.first().copied().unwrap_or(0.0);
    for (i, &s) in sigma.iter().enumerate() {
        let ratio = if s1 > 0.0 { s / s1 } else { 0.0 };
        wr.write_record([(i + 1).to_string(), fmt_f64(s), fmt_f64(ratio)])?;
    }
    wr.flush()?;
    Ok(())
}

fn complex_columns(m: &CMat) -> bool {
    m.iter().any(|z| z.im != 0.0)
}

fn value_fields(row: impl Iterator<Item = C64>, complex: bool) -> Vec<String> {
    row.flat_map(|z| if complex { vec![fmt_f64(z.re), fmt_f64(z.im)] } else { vec![fmt_f64(z.re)] })
        .collect()
}

fn value_headers(prefix: &str, count: usize, complex: bool) -> Vec<String> {
    (1..=count)
        .flat_map(|i| {
            if complex {
                vec![format!("{prefix}{i}_re"), format!("{prefix}{i}_im")]
            } else {
                vec![format!("{prefix}{i}")]
            }
        })
        .collect()
}

/// `omega, pc1, ..., pc_dims`: the coordinates of each centered solution on
/// the leading singular directions.
pub fn write_coords_csv<W: Write>(w: W, omegas: &[f64], coords: &CMat, dims: usize) -> Result<()> {
    let dims = dims.min(coords.ncols());
    let view = coords.columns(0, dims).into_owned();
    let complex = complex_columns(&view);
    let mut wr = csv::Writer::from_writer(w);
    let mut head = vec!["omega".to_string()];
    head.extend(value_headers("pc", dims, complex));
    wr.write_record(&head)?;
    for (k, &om) in omegas.iter().enumerate() {
        let mut rec = vec![fmt_f64(om)];
        rec.extend(value_fields(view.row(k).iter().copied(), complex));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// `omega, x_1, ..., x_n`, one row per solution.
pub fn write_solutions_csv<W: Write>(w: W, omegas: &[f64], x: &CMat) -> Result<()> {
    let complex = complex_columns(x);
    let mut wr = csv::Writer::from_writer(w);
    let mut head = vec!["omega".to_string()];
    head.extend(value_headers("x_", x.nrows(), complex));
    wr.write_record(&head)?;
    for (k, &om) in omegas.iter().enumerate() {
        let mut rec = vec![fmt_f64(om)];
        rec.extend(value_fields(x.column(k).iter().copied(), complex));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

//! Versioned binary problem files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic     8 bytes  "IPCPROB\0"
//! version   u32
//! generator u32 length + UTF-8 name
//! seed      u64
//! n         u64
//! sections  u32 count, then per section:
//!             u32 length + UTF-8 name, u64 rows, u64 cols,
//!             rows·cols f64 values in row-major order
//! ```

use std::io::{self, Read, Write};

use nalgebra::{DMatrix, DVector};

use super::{ArctanQuadraticProblem, FractionalProblem, Problem, ProblemKind, QuadraticProblem};
use crate::error::{IpcError, Result};

pub const MAGIC: &[u8; 8] = b"IPCPROB\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<f64>,
}

impl Section {
    fn matrix(name: &str, m: &DMatrix<f64>) -> Self {
        let data = m
            .row_iter()
            .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
            .collect();
        Self {
            name: name.into(),
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    fn vector(name: &str, v: &DVector<f64>) -> Self {
        Self {
            name: name.into(),
            rows: v.len(),
            cols: 1,
            data: v.iter().copied().collect(),
        }
    }

    fn scalar(name: &str, x: f64) -> Self {
        Self {
            name: name.into(),
            rows: 1,
            cols: 1,
            data: vec![x],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub generator: String,
    pub seed: u64,
    pub n: usize,
    pub sections: Vec<Section>,
}

fn io_err(e: io::Error) -> IpcError {
    IpcError::Format(e.to_string())
}

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 16 {
        return Err(IpcError::Format(format!(
            "string length {len} is implausible"
        )));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(io_err)?;
    String::from_utf8(buf).map_err(|e| IpcError::Format(e.to_string()))
}

impl ProblemFile {
    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        write_str(&mut w, &self.generator)?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.sections.len() as u32).to_le_bytes())?;
        for s in &self.sections {
            write_str(&mut w, &s.name)?;
            w.write_all(&(s.rows as u64).to_le_bytes())?;
            w.write_all(&(s.cols as u64).to_le_bytes())?;
            for v in &s.data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(IpcError::Format("not a problem file (bad magic)".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(IpcError::Format(format!("unsupported version {version}")));
        }
        let generator = read_str(&mut r)?;
        let seed = read_u64(&mut r)?;
        let n = read_u64(&mut r)? as usize;
        let count = read_u32(&mut r)?;
        let mut sections = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let name = read_str(&mut r)?;
            let rows = read_u64(&mut r)? as usize;
            let cols = read_u64(&mut r)? as usize;
            let len = rows
                .checked_mul(cols)
                .filter(|&l| l <= 1 << 28)
                .ok_or_else(|| IpcError::Format(format!("section '{name}' is too large")))?;
            let mut bytes = vec![0u8; len * 8];
            r.read_exact(&mut bytes).map_err(io_err)?;
            let data = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            sections.push(Section {
                name,
                rows,
                cols,
                data,
            });
        }
        Ok(Self {
            generator,
            seed,
            n,
            sections,
        })
    }

    fn section(&self, name: &str) -> Result<&Section> {
        self.sections
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| IpcError::Format(format!("missing section '{name}'")))
    }

    fn matrix(&self, name: &str, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let s = self.section(name)?;
        if s.rows != rows || s.cols != cols {
            return Err(IpcError::Format(format!(
                "section '{name}' is {}x{}, expected {rows}x{cols}",
                s.rows, s.cols
            )));
        }
        Ok(DMatrix::from_row_slice(rows, cols, &s.data))
    }

    fn vector(&self, name: &str) -> Result<DVector<f64>> {
        Ok(DVector::from_column_slice(
            self.matrix(name, self.n, 1)?.as_slice(),
        ))
    }

    fn scalar(&self, name: &str) -> Result<f64> {
        Ok(self.matrix(name, 1, 1)?[(0, 0)])
    }
}

impl Problem {
    pub fn to_file(&self) -> ProblemFile {
        let sections = match self {
            Problem::Fractional(p) => vec![
                Section::matrix("Q", &p.q_mat),
                Section::vector("c", &p.c),
                Section::scalar("q", p.q_const),
                Section::vector("r", &p.r),
                Section::scalar("t", p.t_const),
                Section::vector("x0", &p.x0),
            ],
            Problem::ArctanQuadratic(p) => vec![
                Section::matrix("M", &p.m),
                Section::vector("q", &p.q),
                Section::scalar("L", p.lipschitz),
                Section::vector("x0", &p.x0),
            ],
            Problem::Quadratic(p) => vec![
                Section::vector("H_diag", &p.diag),
                Section::vector("x_star", &p.x_star),
                Section::vector("x0", &p.x0),
                Section::scalar("L", p.lipschitz),
            ],
        };
        ProblemFile {
            generator: self.kind().as_str().into(),
            seed: self.seed(),
            n: self.oracle().dim(),
            sections,
        }
    }

    pub fn from_file(file: &ProblemFile) -> Result<Self> {
        let n = file.n;
        let kind: ProblemKind = file
            .generator
            .parse()
            .map_err(|_| IpcError::Format(format!("unknown generator '{}'", file.generator)))?;
        Ok(match kind {
            ProblemKind::Fractional => Problem::Fractional(FractionalProblem {
                q_mat: file.matrix("Q", n, n)?,
                c: file.vector("c")?,
                q_const: file.scalar("q")?,
                r: file.vector("r")?,
                t_const: file.scalar("t")?,
                x0: file.vector("x0")?,
                seed: file.seed,
            }),
            ProblemKind::ArctanQuadratic => Problem::ArctanQuadratic(ArctanQuadraticProblem {
                m: file.matrix("M", n, n)?,
                q: file.vector("q")?,
                lipschitz: file.scalar("L")?,
                x0: file.vector("x0")?,
                seed: file.seed,
            }),
            ProblemKind::Quadratic => Problem::Quadratic(QuadraticProblem {
                diag: file.vector("H_diag")?,
                x_star: file.vector("x_star")?,
                x0: file.vector("x0")?,
                lipschitz: file.scalar("L")?,
                seed: file.seed,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_generator() {
        for kind in [
            ProblemKind::Fractional,
            ProblemKind::ArctanQuadratic,
            ProblemKind::Quadratic,
        ] {
            let p = Problem::generate(kind, 5, 42, 10.0);
            let mut buf = Vec::new();
            p.to_file().write_to(&mut buf).unwrap();
            let back =
                Problem::from_file(&ProblemFile::read_from(buf.as_slice()).unwrap()).unwrap();
            assert_eq!(back, p, "{kind}");
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(ProblemFile::read_from(&b"NOTAFILE...."[..]).is_err());
        let p = Problem::generate(ProblemKind::Quadratic, 3, 1, 2.0);
        let mut buf = Vec::new();
        p.to_file().write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(ProblemFile::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn header_is_self_describing() {
        let p = Problem::generate(ProblemKind::ArctanQuadratic, 4, 9, 1.0);
        let mut buf = Vec::new();
        p.to_file().write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(
            u32::from_le_bytes(buf[8..12].try_into().unwrap()),
            FORMAT_VERSION
        );
        let f = ProblemFile::read_from(buf.as_slice()).unwrap();
        assert_eq!(f.generator, "arctan-quadratic");
        assert_eq!((f.seed, f.n), (9, 4));
        let m = f.sections.iter().find(|s| s.name == "M").unwrap();
        if let Problem::ArctanQuadratic(a) = &p {
            assert_eq!(m.data[1], a.m[(0, 1)], "row-major order");
        }
    }
}

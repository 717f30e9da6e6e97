//! Regular `(x, p)` grids and the field values sampled on them.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl GridSpec {
    /// Square grid `[-half_width, half_width]²` with `n` nodes per axis.
    pub fn symmetric(half_width: f64, n: usize) -> Self {
        GridSpec {
            x_min: -half_width,
            x_max: half_width,
            nx: n,
            p_min: -half_width,
            p_max: half_width,
            np: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [
            ("x", self.x_min, self.x_max, self.nx),
            ("p", self.p_min, self.p_max, self.np),
        ] {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidGrid(format!("{name} range is not finite")));
            }
            if n == 0 {
                return Err(Error::InvalidGrid(format!("{name} axis has no nodes")));
            }
            if n == 1 && lo != hi {
                return Err(Error::InvalidGrid(format!(
                    "{name} axis has one node but a non-degenerate range"
                )));
            }
            if n > 1 && hi <= lo {
                return Err(Error::InvalidGrid(format!("{name} range must be increasing")));
            }
        }
        Ok(())
    }

    pub fn x_axis(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn p_axis(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Field values stored x-major: node `(ix, ip)` lives at `ix * np + ip`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridValues {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: GridValues,
    pub params: ModelParams,
}

const RASTER_MAGIC: &[u8; 8] = b"CFRASTER";

impl PhaseSpaceGrid {
    pub fn index(&self, ix: usize, ip: usize) -> usize {
        ix * self.p_axis.len() + ip
    }

    pub fn scalar(&self) -> Option<&[f64]> {
        match &self.values {
            GridValues::Scalar(v) => Some(v),
            GridValues::Vector(_) => None,
        }
    }

    /// Interior nodes strictly larger than their eight neighbours.
    pub fn local_maxima(&self) -> Vec<(f64, f64, f64)> {
        let Some(v) = self.scalar() else {
            return Vec::new();
        };
        let (nx, np) = (self.x_axis.len(), self.p_axis.len());
        let mut out = Vec::new();
        for ix in 1..nx.saturating_sub(1) {
            for ip in 1..np.saturating_sub(1) {
                let c = v[self.index(ix, ip)];
                let is_max = (-1i64..=1).all(|dx| {
                    (-1i64..=1).all(|dp| {
                        (dx == 0 && dp == 0)
                            || c > v[self.index((ix as i64 + dx) as usize, (ip as i64 + dp) as usize)]
                    })
                });
                if is_max {
                    out.push((self.x_axis[ix], self.p_axis[ip], c));
                }
            }
        }
        out
    }

    /// Simple binary raster of a scalar field.
    ///
    /// Layout (little endian): the 8-byte magic `CFRASTER`, `nx: u64`,
    /// `np: u64`, `x_min, x_max, p_min, p_max: f64`, then `nx * np` doubles
    /// in x-major order.
    pub fn write_raster<W: Write>(&self, mut w: W) -> Result<()> {
        let v = self
            .scalar()
            .ok_or_else(|| Error::InvalidGrid("raster output needs a scalar field".into()))?;
        w.write_all(RASTER_MAGIC)?;
        w.write_all(&(self.x_axis.len() as u64).to_le_bytes())?;
        w.write_all(&(self.p_axis.len() as u64).to_le_bytes())?;
        for b in [
            self.x_axis[0],
            *self.x_axis.last().unwrap(),
            self.p_axis[0],
            *self.p_axis.last().unwrap(),
        ] {
            w.write_all(&b.to_le_bytes())?;
        }
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a raster written by [`PhaseSpaceGrid::write_raster`]; `params` is not stored in the file.
    pub fn read_raster<R: Read>(mut r: R, params: ModelParams) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != RASTER_MAGIC {
            return Err(Error::Io("not a raster file".into()));
        }
        let mut u = [0u8; 8];
        r.read_exact(&mut u)?;
        let nx = u64::from_le_bytes(u) as usize;
        r.read_exact(&mut u)?;
        let np = u64::from_le_bytes(u) as usize;
        let mut f = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let (x0, x1, p0, p1) = (f()?, f()?, f()?, f()?);
        let mut values = Vec::with_capacity(nx * np);
        for _ in 0..nx * np {
            values.push(f()?);
        }
        Ok(PhaseSpaceGrid {
            x_axis: linspace(x0, x1, nx),
            p_axis: linspace(p0, p1, np),
            values: GridValues::Scalar(values),
            params,
        })
    }
}

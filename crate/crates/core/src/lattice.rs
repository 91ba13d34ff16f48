//! Periodic 2D scalar fields and their finite-difference operators.
//!
//! A [`Field`] stores `nx * ny` values with `y` as the row (outer) index and
//! `x` as the column (fast) index, so cell `(i, j)` lives at `j * nx + i`.
//! Every operator wraps periodically in both directions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    data: Vec<f64>,
}

impl Field {
    /// Zero-filled field.
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        Self::filled(nx, ny, dx, dy, 0.0)
    }

    pub fn filled(nx: usize, ny: usize, dx: f64, dy: f64, value: f64) -> Result<Self> {
        check_extents(nx, ny, dx, dy)?;
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            data: vec![value; nx * ny],
        })
    }

    pub fn from_vec(nx: usize, ny: usize, dx: f64, dy: f64, data: Vec<f64>) -> Result<Self> {
        check_extents(nx, ny, dx, dy)?;
        if data.len() != nx * ny {
            return Err(Error::Grid(format!(
                "data length {} does not match {nx}x{ny}",
                data.len()
            )));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            data,
        })
    }

    /// Builds a field by evaluating `f(i, j)` at every cell.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        check_extents(nx, ny, dx, dy)?;
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f(i, j));
            }
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            data,
        })
    }

    /// A field of the same shape and spacing as `self`.
    pub fn like(&self, value: f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            dy: self.dy,
            data: vec![value; self.data.len()],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.index(i, j);
        self.data[k] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Exchanges the storage with `buf`, which must have the same length.
    pub(crate) fn swap_data(&mut self, buf: &mut Vec<f64>) {
        assert_eq!(buf.len(), self.data.len());
        std::mem::swap(&mut self.data, buf);
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub(crate) fn ensure_same_shape(&self, other: &Field) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ExtentMismatch(self.nx, self.ny, other.nx, other.ny))
        }
    }

    /// First non-finite cell, if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|k| (k % self.nx, k / self.nx))
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone_shape()
        }
    }

    fn clone_shape(&self) -> Field {
        Field {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            dy: self.dy,
            data: Vec::new(),
        }
    }
}

fn check_extents(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<()> {
    // Simulation grids need at least 3 cells per axis (checked in SimParams);
    // stored fields only need to be non-empty.
    if nx == 0 || ny == 0 {
        return Err(Error::Grid(format!("extents must be >= 1, got {nx}x{ny}")));
    }
    if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
        return Err(Error::Grid(format!(
            "spacing must be positive and finite, got dx = {dx}, dy = {dy}"
        )));
    }
    Ok(())
}

/// Periodic index: `-1` maps to `n - 1` and `n` maps to `0`.
#[inline]
pub fn wrap_index(i: isize, n: usize) -> usize {
    debug_assert!(n >= 1);
    i.rem_euclid(n as isize) as usize
}

/// How the central difference `f(i+1) - f(i-1)` is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorMode {
    /// Divide by `dx`, as the original reference code does.
    #[default]
    PaperCode,
    /// Divide by `2 dx`, the standard second-order central difference.
    Centered,
}

impl DivisorMode {
    /// Multiplier applied to the spacing to get the divisor.
    pub fn span(self) -> f64 {
        match self {
            DivisorMode::PaperCode => 1.0,
            DivisorMode::Centered => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DivisorMode::PaperCode => "paper_code",
            DivisorMode::Centered => "centered",
        }
    }
}

impl fmt::Display for DivisorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivisorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper_code" => Ok(DivisorMode::PaperCode),
            "centered" => Ok(DivisorMode::Centered),
            other => Err(format!(
                "expected `paper_code` or `centered`, got `{other}`"
            )),
        }
    }
}

/// Neighbour offsets for one row, precomputed so inner loops avoid `rem_euclid`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RowNeighbours {
    /// Start of the row below (`j - 1`), this row, and the row above (`j + 1`).
    pub south: usize,
    pub row: usize,
    pub north: usize,
}

impl RowNeighbours {
    #[inline]
    pub fn new(j: usize, nx: usize, ny: usize) -> Self {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        Self {
            south: jm * nx,
            row: j * nx,
            north: jp * nx,
        }
    }
}

#[inline]
pub(crate) fn west_east(i: usize, nx: usize) -> (usize, usize) {
    let im = if i == 0 { nx - 1 } else { i - 1 };
    let ip = if i + 1 == nx { 0 } else { i + 1 };
    (im, ip)
}

/// Nine-point Laplacian at one cell, written as a weighted sum of differences
/// from the centre so that uniform input gives exactly zero.
#[inline]
pub(crate) fn laplacian_at(
    data: &[f64],
    rows: RowNeighbours,
    i: usize,
    im: usize,
    ip: usize,
    inv_3dx2: f64,
) -> f64 {
    let c = data[rows.row + i];
    let edges = (data[rows.row + ip] - c)
        + (data[rows.row + im] - c)
        + (data[rows.north + i] - c)
        + (data[rows.south + i] - c);
    let corners = (data[rows.north + ip] - c)
        + (data[rows.south + im] - c)
        + (data[rows.north + im] - c)
        + (data[rows.south + ip] - c);
    (2.0 * edges + corners) * inv_3dx2
}

/// Periodic central differences `(d/dx, d/dy)`.
pub fn central_gradient(f: &Field, mode: DivisorMode) -> (Field, Field) {
    let (nx, ny) = (f.nx, f.ny);
    let inv_x = 1.0 / (mode.span() * f.dx);
    let inv_y = 1.0 / (mode.span() * f.dy);
    let mut gx = f.like(0.0);
    let mut gy = f.like(0.0);
    gx.data
        .par_chunks_mut(nx)
        .zip(gy.data.par_chunks_mut(nx))
        .enumerate()
        .for_each(|(j, (row_x, row_y))| {
            let rows = RowNeighbours::new(j, nx, ny);
            for i in 0..nx {
                let (im, ip) = west_east(i, nx);
                row_x[i] = (f.data[rows.row + ip] - f.data[rows.row + im]) * inv_x;
                row_y[i] = (f.data[rows.north + i] - f.data[rows.south + i]) * inv_y;
            }
        });
    (gx, gy)
}

/// Isotropic nine-point Laplacian with periodic wrap.
///
/// ```text
/// L = [2 (N + S + E + W) + (NE + NW + SE + SW) - 12 C] / (3 dx^2)
/// ```
pub fn nine_point_laplacian(f: &Field) -> Result<Field> {
    require_square(f.dx, f.dy)?;
    let (nx, ny) = (f.nx, f.ny);
    let inv = 1.0 / (3.0 * f.dx * f.dx);
    let mut out = f.like(0.0);
    out.data
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| {
            let rows = RowNeighbours::new(j, nx, ny);
            for (i, v) in row.iter_mut().enumerate() {
                let (im, ip) = west_east(i, nx);
                *v = laplacian_at(&f.data, rows, i, im, ip, inv);
            }
        });
    Ok(out)
}

pub(crate) fn require_square(dx: f64, dy: f64) -> Result<()> {
    if dx == dy {
        Ok(())
    } else {
        Err(Error::NonSquareCells { dx, dy })
    }
}

/// `sum(f) * dx * dy`, accumulated sequentially in raster order.
pub fn lattice_sum(f: &Field) -> f64 {
    f.data.iter().sum::<f64>() * f.dx * f.dy
}

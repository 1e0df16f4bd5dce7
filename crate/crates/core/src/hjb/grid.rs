//! Regular lattices over the cube and the simplex, with piecewise-linear
//! interpolation.
//!
//! Cube grids have `m` points per axis (spacing `h = 2/(m-1)`) and use
//! multilinear interpolation. Simplex grids are the dilated lattice
//! `{k/m : k ∈ N^d, Σk = m}`; interpolation maps a point to cumulative
//! coordinates `c_j = Σ_{a≤j} m·μ_a`, where the lattice becomes the
//! monotone integer vectors of `[0,m]^{d-1}`, and applies the standard
//! sorted-fractional (Freudenthal) simplex rule there. That triangulation
//! respects the monotonicity constraint, so every interpolation vertex maps
//! back to a valid lattice composition.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("cube grids need at least 2 points per axis, got {0}")]
    CubeTooCoarse(usize),
    #[error("simplex grids need d >= 2 and m >= 1 (got d = {d}, m = {m})")]
    BadSimplex { d: usize, m: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("query point has dimension {query}, grid has dimension {grid}")]
    QueryDimension { query: usize, grid: usize },
    #[error("value vector has length {values}, grid has {nodes} nodes")]
    ValueLength { values: usize, nodes: usize },
    #[error("grid function values must be finite (index {0})")]
    NotFinite(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Cube,
    Simplex,
}

/// An enumerated lattice over one of the two state spaces.
pub struct Grid {
    domain: Domain,
    d: usize,
    m: usize,
    h: f64,
    nodes: Vec<Vec<f64>>,
    // Cube indexing.
    strides: Vec<usize>,
    // Simplex indexing.
    comps: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl Grid {
    /// Cube `[-1,1]^d` with `m` points per axis.
    pub fn cube(d: usize, m: usize) -> Result<Arc<Grid>, GridError> {
        if d == 0 {
            return Err(GridError::ZeroDimension);
        }
        if m < 2 {
            return Err(GridError::CubeTooCoarse(m));
        }
        let h = 2.0 / (m - 1) as f64;
        let mut strides = vec![0usize; d];
        let mut stride = 1;
        for s in strides.iter_mut() {
            *s = stride;
            stride *= m;
        }
        let total = stride;
        let mut nodes = Vec::with_capacity(total);
        let mut multi = vec![0usize; d];
        for _ in 0..total {
            nodes.push(multi.iter().map(|&i| -1.0 + i as f64 * h).collect());
            for j in 0..d {
                multi[j] += 1;
                if multi[j] < m {
                    break;
                }
                multi[j] = 0;
            }
        }
        Ok(Arc::new(Grid {
            domain: Domain::Cube,
            d,
            m,
            h,
            nodes,
            strides,
            comps: Vec::new(),
            lookup: HashMap::new(),
        }))
    }

    /// Simplex lattice with denominator `m` over `d` states.
    pub fn simplex(d: usize, m: usize) -> Result<Arc<Grid>, GridError> {
        if d < 2 || m < 1 {
            return Err(GridError::BadSimplex { d, m });
        }
        let mut comps = Vec::new();
        let mut current = vec![0u32; d];
        compositions(m as u32, 0, &mut current, &mut comps);
        let lookup: HashMap<Vec<u32>, usize> =
            comps.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let nodes = comps
            .iter()
            .map(|k| k.iter().map(|&c| c as f64 / m as f64).collect())
            .collect();
        Ok(Arc::new(Grid {
            domain: Domain::Simplex,
            d,
            m,
            h: std::f64::consts::SQRT_2 / m as f64,
            nodes,
            strides: Vec::new(),
            comps,
            lookup,
        }))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Points per axis (cube) or lattice denominator (simplex).
    pub fn resolution(&self) -> usize {
        self.m
    }

    /// Mesh width: axis spacing on the cube, edge length on the simplex.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, index: usize) -> &[f64] {
        &self.nodes[index]
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Neighbor along `axis` in direction `dir` (±1), if inside the grid.
    pub(crate) fn cube_neighbor(&self, index: usize, axis: usize, dir: i64) -> Option<usize> {
        let pos = (index / self.strides[axis]) % self.m;
        let next = pos as i64 + dir;
        if next < 0 || next >= self.m as i64 {
            return None;
        }
        Some((index as i64 + dir * self.strides[axis] as i64) as usize)
    }

    /// Neighbor across the edge `a -> b` (counts `k - e_a + e_b`).
    pub(crate) fn simplex_neighbor(&self, index: usize, a: usize, b: usize) -> Option<usize> {
        let k = &self.comps[index];
        if k[a] == 0 {
            return None;
        }
        let mut next = k.clone();
        next[a] -= 1;
        next[b] += 1;
        self.lookup.get(&next).copied()
    }

    #[cfg(test)]
    pub(crate) fn simplex_index(&self, counts: &[u32]) -> Option<usize> {
        self.lookup.get(counts).copied()
    }

    /// Piecewise-linear interpolation of nodal `values` at `z`. The query is
    /// clamped into the domain. Exact on constants and linear functions.
    pub fn interpolate(&self, values: &[f64], z: &[f64]) -> Result<f64, GridError> {
        if z.len() != self.d {
            return Err(GridError::QueryDimension { query: z.len(), grid: self.d });
        }
        if values.len() != self.nodes.len() {
            return Err(GridError::ValueLength { values: values.len(), nodes: self.nodes.len() });
        }
        Ok(match self.domain {
            Domain::Cube => self.interpolate_cube(values, z),
            Domain::Simplex => self.interpolate_simplex(values, z),
        })
    }

    fn interpolate_cube(&self, values: &[f64], z: &[f64]) -> f64 {
        let m = self.m;
        let mut base = 0usize;
        let mut fracs = Vec::with_capacity(self.d);
        for j in 0..self.d {
            let u = ((z[j] + 1.0) / self.h).clamp(0.0, (m - 1) as f64);
            let cell = (u.floor() as usize).min(m - 2);
            base += cell * self.strides[j];
            fracs.push((u - cell as f64).clamp(0.0, 1.0));
        }
        // Base-plus-differences form: exact when all corner values agree.
        let f0 = values[base];
        let mut acc = f0;
        for corner in 1..(1usize << self.d) {
            let mut idx = base;
            let mut w = 1.0;
            for j in 0..self.d {
                if corner & (1 << j) != 0 {
                    idx += self.strides[j];
                    w *= fracs[j];
                } else {
                    w *= 1.0 - fracs[j];
                }
            }
            acc += w * (values[idx] - f0);
        }
        acc
    }

    fn interpolate_simplex(&self, values: &[f64], z: &[f64]) -> f64 {
        let m = self.m as f64;
        let dc = self.d - 1; // cumulative coordinates
        let mut c = Vec::with_capacity(dc);
        let mut run = 0.0;
        for j in 0..dc {
            run += z[j].max(0.0) * m;
            let prev = if j == 0 { 0.0 } else { c[j - 1] };
            c.push(run.clamp(prev, m));
        }
        // Freudenthal cell: integer base plus fractional parts. A cumulative
        // coordinate sitting exactly on m keeps frac = 0, and its axis is
        // never incremented (zero weight), so vertices stay on the lattice.
        let mut k0 = Vec::with_capacity(dc);
        let mut frac = Vec::with_capacity(dc);
        for j in 0..dc {
            let base = c[j].floor().max(0.0);
            k0.push(base as u32);
            frac.push((c[j] - base).clamp(0.0, 1.0));
        }
        // Monotonicity of the integer base can break at clamped entries.
        for j in 1..dc {
            if k0[j] < k0[j - 1] {
                frac[j] -= (k0[j - 1] - k0[j]) as f64;
                k0[j] = k0[j - 1];
            }
        }
        // Sort axes by descending fractional part; ties favour the higher
        // index so vertex chains stay monotone.
        let mut order: Vec<usize> = (0..dc).collect();
        order.sort_by(|&i, &j| frac[j].partial_cmp(&frac[i]).unwrap().then(j.cmp(&i)));

        let comp_index = |cum: &[u32]| -> usize {
            let mut k = Vec::with_capacity(self.d);
            let mut prev = 0u32;
            for &cj in cum {
                k.push(cj - prev);
                prev = cj;
            }
            k.push(self.m as u32 - prev);
            *self
                .lookup
                .get(&k)
                .unwrap_or_else(|| panic!("interpolation vertex {k:?} off the lattice"))
        };

        let mut vertex = k0.clone();
        let f0 = values[comp_index(&vertex)];
        let mut acc = f0;
        for (t, &axis) in order.iter().enumerate() {
            vertex[axis] += 1;
            let w = frac[axis] - if t + 1 < dc { frac[order[t + 1]] } else { 0.0 };
            if w != 0.0 {
                acc += w * (values[comp_index(&vertex)] - f0);
            }
        }
        acc
    }
}

fn compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let d = current.len();
    if pos == d - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for take in 0..=remaining {
        current[pos] = take;
        compositions(remaining - take, pos + 1, current, out);
    }
}

/// Real values on the nodes of a grid.
#[derive(Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::ValueLength { values: values.len(), nodes: grid.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NotFinite(i));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self, GridError> {
        let values: Vec<f64> = grid.nodes().iter().map(|z| f(z)).collect();
        GridFunction::new(grid.clone(), values)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Result<Self, GridError> {
        GridFunction::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64, GridError> {
        self.grid.interpolate(&self.values, z)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// `sup |self - other|` over the nodes (layouts must agree).
    pub fn sup_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

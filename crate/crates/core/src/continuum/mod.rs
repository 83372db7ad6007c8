//! Method-of-lines solver for the local and non-local continuum systems.

mod diagnostics;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_g, eval_h, eval_r, ModelParams};
use crate::shocks::{Shock, ShockSchedule, Site};
use crate::single_site::{clamp, drive, Stepping};

pub use diagnostics::*;

pub const CFL_SAFETY: f64 = 0.4;
pub const MIN_CELLS: usize = 8;

/// Uniform cell-centered grid with zero-flux boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub dim: usize,
    /// Cells per axis; the second entry is 1 in one dimension.
    pub cells: [usize; 2],
    pub dx: f64,
    pub origin: [f64; 2],
}

impl SpatialGrid {
    pub fn line(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let g = Self {
            dim: 1,
            cells: [cells, 1],
            dx: (hi - lo) / cells as f64,
            origin: [lo, 0.0],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn square(lo: [f64; 2], extent: f64, cells: usize) -> Result<Self> {
        let g = Self {
            dim: 2,
            cells: [cells, cells],
            dx: extent / cells as f64,
            origin: lo,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::InvalidParam {
                name: "dim",
                reason: format!("must be 1 or 2, got {}", self.dim),
            });
        }
        let axes = &self.cells[..self.dim];
        if axes.iter().any(|&c| c < MIN_CELLS) {
            return Err(Error::InvalidParam {
                name: "cells",
                reason: format!("need at least {MIN_CELLS} cells per axis"),
            });
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::InvalidParam {
                name: "dx",
                reason: format!("must be > 0, got {}", self.dx),
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of one cell, dx^dim.
    pub fn cell_measure(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.dx
    }

    /// Cell centers along the first axis.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.cells[0]).map(|i| self.center(0, i)).collect()
    }

    pub fn coords(&self, k: usize) -> [f64; 2] {
        let (i, j) = (k % self.cells[0], k / self.cells[0]);
        [
            self.center(0, i),
            if self.dim == 2 {
                self.center(1, j)
            } else {
                0.0
            },
        ]
    }

    /// Index of the cell containing a point; the upper boundary belongs to the last cell.
    pub fn locate(&self, point: &[f64]) -> Result<usize> {
        if point.len() < self.dim {
            return Err(Error::LocationOutOfGrid(point.to_vec()));
        }
        let mut idx = [0usize; 2];
        for axis in 0..self.dim {
            let u = (point[axis] - self.origin[axis]) / self.dx;
            let n = self.cells[axis];
            if !(u >= 0.0 && u <= n as f64) {
                return Err(Error::LocationOutOfGrid(point.to_vec()));
            }
            idx[axis] = (u.floor() as usize).min(n - 1);
        }
        Ok(idx[0] + self.cells[0] * idx[1])
    }

    /// Largest explicit step for diffusivity `d`.
    pub fn cfl_bound(&self, d: f64) -> f64 {
        CFL_SAFETY * self.dx * self.dx / (2.0 * self.dim as f64 * d)
    }

    /// Zero-flux five-point (or three-point) Laplacian, added into `out` scaled by `d`.
    pub fn laplacian_into(&self, u: &[f64], d: f64, out: &mut [f64]) {
        let [nx, ny] = self.cells;
        let c = d / (self.dx * self.dx);
        for j in 0..ny {
            for i in 0..nx {
                let k = i + nx * j;
                let mut acc = 0.0;
                if i > 0 {
                    acc += u[k - 1] - u[k];
                }
                if i + 1 < nx {
                    acc += u[k + 1] - u[k];
                }
                if self.dim == 2 {
                    if j > 0 {
                        acc += u[k - nx] - u[k];
                    }
                    if j + 1 < ny {
                        acc += u[k + nx] - u[k];
                    }
                }
                out[k] += c * acc;
            }
        }
    }

    /// Discrete L1 norm, cell sum times cell measure.
    pub fn l1(&self, u: &[f64]) -> f64 {
        u.iter().map(|x| x.abs()).sum::<f64>() * self.cell_measure()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Kernel {
    TopHat {
        radius: f64,
    },
    Gaussian {
        width: f64,
    },
    /// Values at integer cell distances 0, 1, 2, ...
    Explicit {
        samples: Vec<f64>,
    },
}

impl Kernel {
    fn value(&self, dist: f64, dx: f64) -> f64 {
        match self {
            Kernel::TopHat { radius } => {
                if dist <= *radius + 1e-12 * dx {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Gaussian { width } => (-0.5 * (dist / width).powi(2)).exp(),
            Kernel::Explicit { samples } => {
                let k = (dist / dx).round() as usize;
                samples.get(k).copied().unwrap_or(0.0)
            }
        }
    }

    /// Support radius in cells.
    fn reach(&self, dx: f64) -> usize {
        match self {
            Kernel::TopHat { radius } => (radius / dx + 1e-9).floor() as usize,
            Kernel::Gaussian { width } => (6.0 * width / dx).ceil() as usize,
            Kernel::Explicit { samples } => samples.len().saturating_sub(1),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Kernel::TopHat { radius } => radius.is_finite() && *radius >= 0.0,
            Kernel::Gaussian { width } => width.is_finite() && *width > 0.0,
            Kernel::Explicit { samples } => {
                !samples.is_empty() && samples.iter().all(|s| s.is_finite() && *s >= 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam {
                name: "kernel",
                reason: format!("{self:?} is not a nonnegative kernel"),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonlocalVariant {
    /// Normalized averaging inflow.
    #[default]
    Averaging,
    /// Convolution minus identity with the extra decay term.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlocal {
    pub eta_bar: f64,
    pub kernel: Kernel,
    #[serde(default = "yes")]
    pub normalize: bool,
    #[serde(default)]
    pub variant: NonlocalVariant,
    /// Drops the second eta_bar in the symmetric variant.
    #[serde(default)]
    pub drop_duplicate: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Deposit {
    #[default]
    Cell,
    Gaussian {
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeParams {
    pub model: ModelParams,
    pub d: f64,
    pub nonlocal: Option<Nonlocal>,
    pub deposit: Deposit,
}

impl PdeParams {
    pub fn local(model: ModelParams, d: f64) -> Self {
        Self {
            model,
            d,
            nonlocal: None,
            deposit: Deposit::Cell,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidParam {
                name: "d",
                reason: format!("diffusivity must be > 0, got {}", self.d),
            });
        }
        if self.model.kappa() <= 0.0 {
            return Err(Error::InvalidParam {
                name: "eta",
                reason: format!(
                    "kappa = omega - eta must be > 0, got {}",
                    self.model.kappa()
                ),
            });
        }
        if let Some(nl) = &self.nonlocal {
            if !(nl.eta_bar.is_finite() && nl.eta_bar > 0.0) {
                return Err(Error::InvalidParam {
                    name: "eta_bar",
                    reason: format!("must be > 0, got {}", nl.eta_bar),
                });
            }
            nl.kernel.validate()?;
        }
        if let Deposit::Gaussian { width } = self.deposit {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidParam {
                    name: "deposit.width",
                    reason: format!("must be > 0, got {width}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl FieldState {
    pub fn uniform(n: usize, lambda: f64, alpha: f64) -> Self {
        Self {
            lambda: vec![lambda; n],
            alpha: vec![alpha; n],
        }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> (f64, f64)>(grid: &SpatialGrid, f: F) -> Self {
        let (lambda, alpha) = (0..grid.len()).map(|k| f(grid.coords(k))).unzip();
        Self { lambda, alpha }
    }
}

/// Sparse rows of the assembled non-local coupling operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperator {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl CouplingOperator {
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (k, row) in self.rows.iter().enumerate() {
            out[k] = row.iter().map(|&(j, w)| w * u[j]).sum();
        }
    }

    /// Dense copy, for inspection on small grids.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len();
        let mut m = vec![vec![0.0; n]; n];
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                m[k][j] += w;
            }
        }
        m
    }
}

/// Midpoint quadrature of the kernel with zero padding outside the domain.
pub fn assemble_coupling(grid: &SpatialGrid, nl: &Nonlocal) -> Result<CouplingOperator> {
    let reach = nl.kernel.reach(grid.dx) as isize;
    let [nx, ny] = [grid.cells[0] as isize, grid.cells[1] as isize];
    let reach_y = if grid.dim == 2 { reach } else { 0 };
    let h = grid.cell_measure();
    let weight = |di: isize, dj: isize| {
        let dist = grid.dx * ((di * di + dj * dj) as f64).sqrt();
        nl.kernel.value(dist, grid.dx) * h
    };
    let mut full = 0.0;
    for dj in -reach_y..=reach_y {
        for di in -reach..=reach {
            full += weight(di, dj);
        }
    }
    let mut rows = Vec::with_capacity(grid.len());
    for j in 0..ny {
        for i in 0..nx {
            let mut row = Vec::new();
            for dj in -reach_y..=reach_y {
                for di in -reach..=reach {
                    let (ii, jj) = (i + di, j + dj);
                    if ii < 0 || jj < 0 || ii >= nx || jj >= ny {
                        continue;
                    }
                    let w = weight(di, dj);
                    if w > 0.0 {
                        row.push(((ii + nx * jj) as usize, w));
                    }
                }
            }
            let mass: f64 = row.iter().map(|r| r.1).sum();
            let k = (i + nx * j) as usize;
            if mass <= 0.0 {
                return Err(Error::EmptyKernelRow(k));
            }
            if nl.normalize {
                let norm = match nl.variant {
                    NonlocalVariant::Averaging => mass,
                    NonlocalVariant::Symmetric => full,
                };
                for r in &mut row {
                    r.1 /= norm;
                }
            }
            rows.push(row);
        }
    }
    Ok(CouplingOperator { rows })
}

/// Pre-assembled right-hand side for one grid and parameter set.
pub struct PdeSystem<'a> {
    pub grid: &'a SpatialGrid,
    pub params: &'a PdeParams,
    coupling: Option<CouplingOperator>,
    scratch: Vec<f64>,
}

impl<'a> PdeSystem<'a> {
    pub fn new(grid: &'a SpatialGrid, params: &'a PdeParams) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        let coupling = params
            .nonlocal
            .as_ref()
            .map(|nl| assemble_coupling(grid, nl))
            .transpose()?;
        Ok(Self {
            grid,
            params,
            coupling,
            scratch: vec![0.0; grid.len()],
        })
    }

    pub fn coupling(&self) -> Option<&CouplingOperator> {
        self.coupling.as_ref()
    }

    pub fn rhs(&mut self, lambda: &[f64], alpha: &[f64], dl: &mut [f64], da: &mut [f64]) {
        let p = &self.params.model;
        let d = self.params.d;
        let kappa = p.kappa();
        dl.fill(0.0);
        da.fill(0.0);
        self.grid.laplacian_into(lambda, d, dl);
        match (&self.params.nonlocal, &self.coupling) {
            (None, _) | (_, None) => {
                self.grid.laplacian_into(alpha, d, da);
                for k in 0..lambda.len() {
                    let (l, a) = (lambda[k], alpha[k]);
                    dl[k] += eval_r(a, p) * eval_g(l, p) - kappa * l;
                    da[k] += -(eval_h(l, p) - p.eta) * a + p.theta * p.alpha_b;
                }
            }
            (Some(nl), Some(op)) => {
                op.apply(alpha, &mut self.scratch);
                for k in 0..lambda.len() {
                    let (l, a) = (lambda[k], alpha[k]);
                    dl[k] += -kappa * l + eval_r(a, p) * eval_g(l, p) + p.omega * p.lambda_b;
                    let h = eval_h(l, p);
                    da[k] += match nl.variant {
                        NonlocalVariant::Averaging => nl.eta_bar * self.scratch[k] - h * a,
                        NonlocalVariant::Symmetric => {
                            let extra = if nl.drop_duplicate { 0.0 } else { nl.eta_bar };
                            nl.eta_bar * (self.scratch[k] - a) - (h + extra) * a
                        }
                    } + p.theta * p.alpha_b;
                }
            }
        }
    }
}

/// Local system derivatives.
pub fn pde_rhs_local(
    state: &FieldState,
    grid: &SpatialGrid,
    params: &PdeParams,
) -> Result<FieldState> {
    let local = PdeParams {
        nonlocal: None,
        ..params.clone()
    };
    let mut sys = PdeSystem::new(grid, &local)?;
    let mut out = FieldState::uniform(grid.len(), 0.0, 0.0);
    sys.rhs(&state.lambda, &state.alpha, &mut out.lambda, &mut out.alpha);
    Ok(out)
}

/// Non-local system derivatives; requires the non-local block.
pub fn pde_rhs_nonlocal(
    state: &FieldState,
    grid: &SpatialGrid,
    params: &PdeParams,
) -> Result<FieldState> {
    if params.nonlocal.is_none() {
        return Err(Error::InvalidParam {
            name: "nonlocal",
            reason: "non-local parameters are missing".into(),
        });
    }
    let mut sys = PdeSystem::new(grid, params)?;
    let mut out = FieldState::uniform(grid.len(), 0.0, 0.0);
    sys.rhs(&state.lambda, &state.alpha, &mut out.lambda, &mut out.alpha);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeStepping {
    pub t_end: f64,
    /// Defaults to the CFL bound.
    pub dt: Option<f64>,
    pub stride: usize,
}

impl PdeStepping {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            dt: None,
            stride: 1,
        }
    }

    pub fn dt(self, dt: f64) -> Self {
        Self {
            dt: Some(dt),
            ..self
        }
    }

    pub fn stride(self, stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..self
        }
    }

    /// Resolved step, rejecting violations of the CFL bound.
    pub fn resolve_dt(&self, grid: &SpatialGrid, d: f64) -> Result<f64> {
        let bound = grid.cfl_bound(d);
        match self.dt {
            None => Ok(bound),
            Some(dt) if dt > bound * (1.0 + 1e-12) => Err(Error::Cfl { dt, bound }),
            Some(dt) if !(dt.is_finite() && dt > 0.0) => Err(Error::InvalidParam {
                name: "dt",
                reason: format!("must be > 0, got {dt}"),
            }),
            Some(dt) => Ok(dt),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTrajectory {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub shock_marks: Vec<usize>,
    pub params: PdeParams,
    pub clamps: u64,
}

impl FieldTrajectory {
    pub fn last_shock_time(&self) -> Option<f64> {
        self.shock_marks.last().map(|&i| self.times[i])
    }

    /// Rows `t x [y] lambda alpha` at 17 significant digits.
    pub fn write_columns<W: Write>(&self, mut w: W) -> io::Result<()> {
        if self.grid.dim == 1 {
            writeln!(w, "t x lambda alpha")?;
        } else {
            writeln!(w, "t x y lambda alpha")?;
        }
        for (n, t) in self.times.iter().enumerate() {
            for k in 0..self.grid.len() {
                let [x, y] = self.grid.coords(k);
                let (l, a) = (self.lambda[n][k], self.alpha[n][k]);
                if self.grid.dim == 1 {
                    writeln!(w, "{t:.16e} {x:.16e} {l:.16e} {a:.16e}")?;
                } else {
                    writeln!(w, "{t:.16e} {x:.16e} {y:.16e} {l:.16e} {a:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Adds a shock's mass to the tension field.
pub fn deposit_shock(
    grid: &SpatialGrid,
    deposit: Deposit,
    alpha: &mut [f64],
    shock: &Shock,
) -> Result<()> {
    let point = match &shock.site {
        Site::Point(p) => p.clone(),
        _ => return Err(Error::MissingSite("point")),
    };
    let k = grid.locate(&point)?;
    let h = grid.cell_measure();
    match deposit {
        Deposit::Cell => alpha[k] += shock.amplitude / h,
        Deposit::Gaussian { width } => {
            let weights: Vec<f64> = (0..grid.len())
                .map(|j| {
                    let c = grid.coords(j);
                    let r2: f64 = (0..grid.dim).map(|ax| (c[ax] - point[ax]).powi(2)).sum();
                    (-0.5 * r2 / (width * width)).exp()
                })
                .collect();
            let total: f64 = weights.iter().sum();
            for (a, w) in alpha.iter_mut().zip(&weights) {
                *a += shock.amplitude * w / (total * h);
            }
        }
    }
    Ok(())
}

/// RK4 method-of-lines integration with exact stops at shock times.
pub fn integrate_pde(
    params: &PdeParams,
    grid: &SpatialGrid,
    schedule: &ShockSchedule,
    initial: &FieldState,
    stepping: &PdeStepping,
) -> Result<FieldTrajectory> {
    let mut sys = PdeSystem::new(grid, params)?;
    let dt = stepping.resolve_dt(grid, params.d)?;
    let n = grid.len();
    if initial.lambda.len() != n || initial.alpha.len() != n {
        return Err(Error::InvalidParam {
            name: "initial",
            reason: format!("field length must be {n}"),
        });
    }
    let shocks = schedule.realize_seeded(stepping.t_end)?;
    for s in &shocks {
        match &s.site {
            Site::Point(p) => {
                grid.locate(p)?;
            }
            _ => return Err(Error::MissingSite("point")),
        }
    }
    let st = Stepping::new(stepping.t_end, dt).stride(stepping.stride);
    let state = std::cell::RefCell::new(initial.clone());
    let mut k: [Vec<f64>; 8] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tl = vec![0.0; n];
    let mut ta = vec![0.0; n];
    let mut clamps = 0u64;
    let (mut times, mut lam, mut alp, mut marks) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    drive(
        &shocks,
        &st,
        |t, h| {
            let mut s = state.borrow_mut();
            let FieldState { lambda, alpha } = &mut *s;
            let [k1l, k1a, k2l, k2a, k3l, k3a, k4l, k4a] = &mut k;
            sys.rhs(lambda, alpha, k1l, k1a);
            for i in 0..n {
                tl[i] = lambda[i] + 0.5 * h * k1l[i];
                ta[i] = alpha[i] + 0.5 * h * k1a[i];
            }
            sys.rhs(&tl, &ta, k2l, k2a);
            for i in 0..n {
                tl[i] = lambda[i] + 0.5 * h * k2l[i];
                ta[i] = alpha[i] + 0.5 * h * k2a[i];
            }
            sys.rhs(&tl, &ta, k3l, k3a);
            for i in 0..n {
                tl[i] = lambda[i] + h * k3l[i];
                ta[i] = alpha[i] + h * k3a[i];
            }
            sys.rhs(&tl, &ta, k4l, k4a);
            for i in 0..n {
                lambda[i] += h / 6.0 * (k1l[i] + 2.0 * k2l[i] + 2.0 * k3l[i] + k4l[i]);
                alpha[i] += h / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
            }
            for x in lambda.iter_mut().chain(alpha.iter_mut()) {
                if !x.is_finite() {
                    return Err(Error::BlowUp { time: t + h });
                }
                clamp(x, &mut clamps);
            }
            Ok(())
        },
        |shock| deposit_shock(grid, params.deposit, &mut state.borrow_mut().alpha, shock),
        |t, shocked| {
            if shocked {
                marks.push(times.len());
            }
            let s = state.borrow();
            times.push(t);
            lam.push(s.lambda.clone());
            alp.push(s.alpha.clone());
        },
    )?;
    Ok(FieldTrajectory {
        grid: grid.clone(),
        times,
        lambda: lam,
        alpha: alp,
        shock_marks: marks,
        params: params.clone(),
        clamps,
    })
}

use std::path::PathBuf;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use scatter1d::grid::{default_grid, k_grid};
use scatter1d::models::PotentialModel;
use scatter1d::spectra::{
    classify_spectrum, find_invisibility, slab_laser_solve, InvisibilityKind, InvisibilityOptions,
    LaserQuery, LaserTarget, Root, SpectralKind, SpectrumOptions,
};
use scatter1d::symmetry::{
    classify_system, Exactness, SymmetryOp, SymmetryVerdict, DEFAULT_SYMMETRY_TOL,
};
use scatter1d::verify::{run_all, CheckStatus, ResidualReport, VerifyOptions};
use scatter1d::{
    det_s, scattering_from_transfer, CoefficientPair, ScatterError, ScatteringSystem,
    TransferMatrix, C64,
};

use crate::config::{Format, GridConfig, JobConfig, ModelConfig};
use crate::output::{emit, finite_c, fmt_f64, to_json, Csv, Cx, Event, Fixed};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    Spectra,
    Laser,
    Symmetry,
    Verify,
    Profile,
    Invisibility,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::Spectra => "spectra",
            Command::Laser => "laser",
            Command::Symmetry => "symmetry",
            Command::Verify => "verify",
            Command::Profile => "profile",
            Command::Invisibility => "invisibility",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Sweep => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Flag values that override the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub grid: Option<GridConfig>,
    pub format: Option<Format>,
    pub ci: bool,
}

pub struct Job {
    command: Command,
    cfg: JobConfig,
    flags: Overrides,
}

fn from_scatter(e: ScatterError) -> CliError {
    match e {
        ScatterError::InvalidModel(_)
        | ScatterError::InvalidArgument(_)
        | ScatterError::DuplicateSamples(_)
        | ScatterError::InsufficientSamples { .. } => CliError::Validation(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

/// Multiplies the first row of every transfer matrix by a constant, which
/// scales `det M` without changing what the model claims it should be.
struct Faulty {
    inner: PotentialModel,
    scale: C64,
}

impl ScatteringSystem for Faulty {
    fn transfer_matrix(&self, k: C64) -> scatter1d::Result<TransferMatrix> {
        let m = self.inner.transfer_matrix(k)?;
        Ok(TransferMatrix::new(
            k,
            m.m11 * self.scale,
            m.m12 * self.scale,
            m.m21,
            m.m22,
        ))
    }

    fn expected_det(&self, k: C64) -> Option<scatter1d::Result<C64>> {
        self.inner.expected_det(k)
    }

    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
}

impl Job {
    pub fn new(command: Command, cfg: JobConfig, flags: Overrides) -> Result<Self, CliError> {
        if let Some(c) = &cfg.command {
            if c != command.name() {
                return Err(CliError::Validation(format!(
                    "command: config is for {c:?} but {:?} was requested",
                    command.name()
                )));
            }
        }
        if let Some(t) = flags.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Validation(format!(
                    "--tol must be positive, got {t}"
                )));
            }
        }
        Ok(Self {
            command,
            cfg,
            flags,
        })
    }

    fn format(&self) -> Format {
        if let Some(f) = self.flags.format.or(self.cfg.output.format) {
            return f;
        }
        let ext = self
            .out_path()
            .and_then(|p| p.extension().map(|e| e.to_string_lossy().to_lowercase()));
        match ext.as_deref() {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => self.command.default_format(),
        }
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.flags
            .out
            .clone()
            .or_else(|| self.cfg.output.path.clone())
    }

    fn model(&self) -> Result<PotentialModel, CliError> {
        let value = self.cfg.model.clone().ok_or_else(|| {
            CliError::Validation(format!("model: required for {}", self.command.name()))
        })?;
        ModelConfig::from_value(value)?.build()
    }

    fn system(&self) -> Result<Box<dyn ScatteringSystem>, CliError> {
        let model = self.model()?;
        Ok(match self.cfg.fault {
            Some(f) => Box::new(Faulty {
                inner: model,
                scale: f.det_scale.into(),
            }),
            None => Box::new(model),
        })
    }

    fn grid(&self, system: &dyn ScatteringSystem) -> Result<Vec<f64>, CliError> {
        match self.flags.grid.or(self.cfg.grid) {
            Some(g) if !(g.min > 0.0) => Err(CliError::Validation(format!(
                "grid: min must be positive for a real sweep, got {}",
                g.min
            ))),
            Some(g) => k_grid(g.min, g.max, g.count, g.spacing.into())
                .map_err(|e| CliError::Validation(format!("grid: {e}"))),
            None => Ok(default_grid(system.length_scale())),
        }
    }

    pub fn run(&self) -> Result<(), CliError> {
        let text = match self.command {
            Command::Sweep => self.sweep()?,
            Command::Spectra => self.spectra()?,
            Command::Laser => self.laser()?,
            Command::Symmetry => self.symmetry()?,
            Command::Verify => return self.verify(),
            Command::Profile => self.profile()?,
            Command::Invisibility => self.invisibility()?,
        };
        emit(self.out_path().as_deref(), &text)
    }

    fn report_events(events: &[Event]) {
        for e in events {
            warn!("k = {}: {} ({})", fmt_f64(e.k.0), e.kind, e.message);
        }
    }

    fn sweep(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Row {
            k: Fixed,
            r_l: Cx,
            r_r: Cx,
            t_l: Cx,
            t_r: Cx,
            abs2_r_l: Fixed,
            abs2_r_r: Fixed,
            abs2_t_l: Fixed,
            abs2_t_r: Fixed,
            det_m: Cx,
            det_s: Cx,
        }
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            rows: Vec<Row>,
            events: Vec<Event>,
        }

        let system = self.system()?;
        let grid = self.grid(system.as_ref())?;
        let results: Vec<Result<Row, Event>> = grid
            .par_iter()
            .map(|&k| {
                let event = |kind, message: String| Event {
                    k: Fixed(k),
                    kind,
                    message,
                };
                let m = system
                    .transfer_matrix(C64::new(k, 0.0))
                    .map_err(|e| event("evaluation_error", e.to_string()))?;
                let d = scattering_from_transfer(&m).map_err(|e| match e {
                    ScatterError::SpectralSingularityProximity { .. } => {
                        event("spectral_singularity", e.to_string())
                    }
                    _ => event("evaluation_error", e.to_string()),
                })?;
                let (det_m, ds) = (m.det(), det_s(&d));
                let values = [d.r_l, d.r_r, d.t_l, d.t_r, det_m, ds];
                if !values.iter().all(|z| finite_c(*z)) {
                    return Err(event("non_finite", "amplitudes overflowed".into()));
                }
                Ok(Row {
                    k: Fixed(k),
                    r_l: Cx(d.r_l),
                    r_r: Cx(d.r_r),
                    t_l: Cx(d.t_l),
                    t_r: Cx(d.t_r),
                    abs2_r_l: Fixed(d.r_l.norm_sqr()),
                    abs2_r_r: Fixed(d.r_r.norm_sqr()),
                    abs2_t_l: Fixed(d.t_l.norm_sqr()),
                    abs2_t_r: Fixed(d.t_r.norm_sqr()),
                    det_m: Cx(det_m),
                    det_s: Cx(ds),
                })
            })
            .collect();
        let mut rows = Vec::new();
        let mut events = Vec::new();
        for r in results {
            match r {
                Ok(row) => rows.push(row),
                Err(e) => events.push(e),
            }
        }
        Self::report_events(&events);

        match self.format() {
            Format::Json => to_json(&Out {
                command: "sweep",
                rows,
                events,
            }),
            Format::Csv => {
                let mut csv = Csv::new(&[
                    "k", "re_r_l", "im_r_l", "re_r_r", "im_r_r", "re_t_l", "im_t_l", "re_t_r",
                    "im_t_r", "abs2_r_l", "abs2_r_r", "abs2_t_l", "abs2_t_r", "re_det_m",
                    "im_det_m", "re_det_s", "im_det_s",
                ]);
                for r in rows {
                    let mut cells = vec![fmt_f64(r.k.0)];
                    for z in [r.r_l, r.r_r, r.t_l, r.t_r] {
                        cells.extend([fmt_f64(z.0.re), fmt_f64(z.0.im)]);
                    }
                    for x in [r.abs2_r_l, r.abs2_r_r, r.abs2_t_l, r.abs2_t_r] {
                        cells.push(fmt_f64(x.0));
                    }
                    for z in [r.det_m, r.det_s] {
                        cells.extend([fmt_f64(z.0.re), fmt_f64(z.0.im)]);
                    }
                    csv.row(&cells);
                }
                Ok(csv.finish())
            }
        }
    }

    fn spectra(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Point {
            kind: &'static str,
            k: Cx,
            energy: Fixed,
            width: Fixed,
            residual: Fixed,
        }
        #[derive(Serialize)]
        struct RootOut {
            k: Cx,
            residual: Option<Fixed>,
            converged: bool,
        }
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            points: Vec<Point>,
            unclassified: Vec<RootOut>,
            unconverged: Vec<RootOut>,
        }

        let system = self.system()?;
        let rc = self
            .cfg
            .rect
            .ok_or_else(|| CliError::Validation("rect: required for spectra".into()))?;
        let mut opts = SpectrumOptions::default();
        opts.zeros.nx = rc.nx.unwrap_or(opts.zeros.nx);
        opts.zeros.ny = rc.ny.unwrap_or(opts.zeros.ny);
        let t = &self.cfg.tolerances;
        opts.zeros.tol_res = self
            .flags
            .tol
            .or(t.root_residual)
            .unwrap_or(opts.zeros.tol_res);
        opts.zeros.tol_sep = t.root_separation.unwrap_or(opts.zeros.tol_sep);
        opts.self_dual_tol = t.self_dual.unwrap_or(opts.self_dual_tol);

        let s = classify_spectrum(system.as_ref(), rc.rect(), &opts).map_err(from_scatter)?;
        let roots = |rs: &[Root]| -> Vec<RootOut> {
            rs.iter()
                .filter(|r| finite_c(r.k))
                .map(|r| RootOut {
                    k: Cx(r.k),
                    residual: r.residual.is_finite().then_some(Fixed(r.residual)),
                    converged: r.converged,
                })
                .collect()
        };
        let points: Vec<Point> = s
            .points
            .iter()
            .map(|p| Point {
                kind: spectral_kind(p.kind),
                k: Cx(p.k),
                energy: Fixed(p.energy),
                width: Fixed(p.width),
                residual: Fixed(p.residual),
            })
            .collect();
        if !s.unconverged.is_empty() {
            warn!(
                "{} local minima of |M22| or |M11| did not converge to zeros",
                s.unconverged.len()
            );
        }
        match self.format() {
            Format::Json => to_json(&Out {
                command: "spectra",
                points,
                unclassified: roots(&s.unclassified),
                unconverged: roots(&s.unconverged),
            }),
            Format::Csv => {
                let mut csv = Csv::new(&["kind", "re_k", "im_k", "energy", "width", "residual"]);
                for p in points {
                    csv.row(&[
                        p.kind.to_string(),
                        fmt_f64(p.k.0.re),
                        fmt_f64(p.k.0.im),
                        fmt_f64(p.energy.0),
                        fmt_f64(p.width.0),
                        fmt_f64(p.residual.0),
                    ]);
                }
                Ok(csv.finish())
            }
        }
    }

    fn laser(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            length: Fixed,
            mode: u32,
            k0: Fixed,
            n0: Cx,
            eta0: Fixed,
            kappa0: Fixed,
            phi0: Fixed,
            g: Fixed,
            g_from_index: Fixed,
            m22_residual: Fixed,
        }

        let lc = self
            .cfg
            .laser
            .ok_or_else(|| CliError::Validation("laser: section required".into()))?;
        let target = match (lc.eta0, lc.k0) {
            (Some(eta), None) => LaserTarget::RealIndex(eta),
            (None, Some(k)) => LaserTarget::Wavenumber(k),
            _ => {
                return Err(CliError::Validation(
                    "laser: exactly one of eta0 and k0 must be given".into(),
                ))
            }
        };
        let mut q = LaserQuery::new(lc.length, lc.mode, target);
        q.max_iter = lc.max_iter.unwrap_or(q.max_iter);
        q.damping = lc.damping.unwrap_or(q.damping);
        let s = slab_laser_solve(&q).map_err(from_scatter)?;
        let out = Out {
            command: "laser",
            length: Fixed(lc.length),
            mode: s.mode,
            k0: Fixed(s.k0),
            n0: Cx(s.n0),
            eta0: Fixed(s.eta0),
            kappa0: Fixed(s.kappa0),
            phi0: Fixed(s.phi0),
            g: Fixed(s.g),
            g_from_index: Fixed(s.gain_from_index()),
            m22_residual: Fixed(s.m22_residual),
        };
        match self.format() {
            Format::Json => to_json(&out),
            Format::Csv => {
                let mut csv = Csv::new(&[
                    "length",
                    "mode",
                    "k0",
                    "re_n0",
                    "im_n0",
                    "phi0",
                    "g",
                    "g_from_index",
                    "m22_residual",
                ]);
                csv.row(&[
                    fmt_f64(lc.length),
                    s.mode.to_string(),
                    fmt_f64(s.k0),
                    fmt_f64(s.n0.re),
                    fmt_f64(s.n0.im),
                    fmt_f64(s.phi0),
                    fmt_f64(s.g),
                    fmt_f64(s.gain_from_index()),
                    fmt_f64(s.m22_residual),
                ]);
                Ok(csv.finish())
            }
        }
    }

    fn symmetry_tol(&self) -> f64 {
        self.cfg.tolerances.symmetry.unwrap_or(DEFAULT_SYMMETRY_TOL)
    }

    fn symmetry(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            verdicts: Vec<VerdictOut>,
        }
        let system = self.system()?;
        let grid = self.grid(system.as_ref())?;
        let tol = self.flags.tol.unwrap_or(self.symmetry_tol());
        let mut ops = vec![SymmetryOp::Parity, SymmetryOp::TimeReversal, SymmetryOp::PT];
        for &a in &self.cfg.symmetry.about {
            ops.push(SymmetryOp::ParityAbout(a));
            ops.push(SymmetryOp::PTAbout(a));
        }
        let verdicts = ops
            .into_iter()
            .map(|op| classify_system(system.as_ref(), &grid, op, tol).map(|v| verdict_out(&v)))
            .collect::<scatter1d::Result<Vec<_>>>()
            .map_err(from_scatter)?;
        match self.format() {
            Format::Json => to_json(&Out {
                command: "symmetry",
                verdicts,
            }),
            Format::Csv => {
                let mut csv = Csv::new(&[
                    "op",
                    "holds",
                    "max_residual",
                    "tolerance",
                    "exactness",
                    "tau_max",
                    "skipped",
                ]);
                for v in verdicts {
                    csv.row(&[
                        v.op,
                        v.holds.to_string(),
                        v.max_residual.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        fmt_f64(v.tolerance.0),
                        v.exactness.to_string(),
                        v.tau_max.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        v.skipped.to_string(),
                    ]);
                }
                Ok(csv.finish())
            }
        }
    }

    fn verify(&self) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Check {
            identity: String,
            status: &'static str,
            passed: bool,
            max_residual: Option<Fixed>,
            mean_residual: Option<Fixed>,
            tolerance: Fixed,
            skipped_points: usize,
            note: Option<String>,
        }
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            passed: bool,
            grid_points: usize,
            verdicts: Vec<VerdictOut>,
            checks: Vec<Check>,
        }

        let system = self.system()?;
        let grid = self.grid(system.as_ref())?;
        let opts = VerifyOptions {
            tol: self.flags.tol.or(self.cfg.tolerances.identity),
            symmetry_tol: self.symmetry_tol(),
        };
        let report = run_all(system.as_ref(), &grid, &opts);
        let fixed = |x: Option<f64>| x.filter(|v| v.is_finite()).map(Fixed);
        let check = |r: &ResidualReport| Check {
            identity: r.identity.clone(),
            status: match r.status {
                CheckStatus::Passed => "passed",
                CheckStatus::Failed => "failed",
                CheckStatus::NotApplicable => "not_applicable",
            },
            passed: r.passed,
            max_residual: fixed(r.max_residual),
            mean_residual: fixed(r.mean_residual),
            tolerance: Fixed(r.tolerance),
            skipped_points: r.skipped_points,
            note: r.note.clone(),
        };
        let passed = report.all_passed();
        let out = Out {
            command: "verify",
            passed,
            grid_points: grid.len(),
            verdicts: report.verdicts.iter().map(verdict_out).collect(),
            checks: report.reports.iter().map(check).collect(),
        };
        for c in out.checks.iter().filter(|c| c.status == "failed") {
            warn!(
                "{} failed: max residual {} exceeds {}",
                c.identity,
                c.max_residual
                    .map(|x| fmt_f64(x.0))
                    .unwrap_or_else(|| "n/a".into()),
                fmt_f64(c.tolerance.0)
            );
        }
        let text = match self.format() {
            Format::Json => to_json(&out)?,
            Format::Csv => {
                let mut csv = Csv::new(&[
                    "identity",
                    "status",
                    "max_residual",
                    "mean_residual",
                    "tolerance",
                    "skipped_points",
                ]);
                for c in &out.checks {
                    csv.row(&[
                        c.identity.clone(),
                        c.status.to_string(),
                        c.max_residual.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        c.mean_residual.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        fmt_f64(c.tolerance.0),
                        c.skipped_points.to_string(),
                    ]);
                }
                csv.finish()
            }
        };
        emit(self.out_path().as_deref(), &text)?;
        if self.flags.ci && !passed {
            return Err(CliError::VerifyFailed);
        }
        Ok(())
    }

    fn profile(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Entry {
            index: usize,
            start: Option<Fixed>,
            end: Option<Fixed>,
            a: Cx,
            b: Cx,
        }
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            k: Fixed,
            regions: Vec<Entry>,
        }
        if self.cfg.fault.is_some() {
            return Err(CliError::Validation(
                "fault: not supported for profile, which propagates through model pieces".into(),
            ));
        }
        let pc = self
            .cfg
            .profile
            .ok_or_else(|| CliError::Validation("profile: section required".into()))?;
        let model = self.model()?;
        let left = CoefficientPair::new(pc.left[0].into(), pc.left[1].into());
        let entries = model
            .coefficient_profile(pc.k, left)
            .map_err(from_scatter)?;
        let mut regions = Vec::with_capacity(entries.len());
        for e in entries {
            let (a, b) = (e.coefficients.a, e.coefficients.b);
            if !(finite_c(a) && finite_c(b)) {
                return Err(CliError::Numerical(format!(
                    "profile coefficients overflowed in region {}",
                    e.region.index
                )));
            }
            regions.push(Entry {
                index: e.region.index,
                start: e.region.start.map(Fixed),
                end: e.region.end.map(Fixed),
                a: Cx(a),
                b: Cx(b),
            });
        }
        match self.format() {
            Format::Json => to_json(&Out {
                command: "profile",
                k: Fixed(pc.k),
                regions,
            }),
            Format::Csv => {
                let mut csv = Csv::new(&["index", "start", "end", "re_a", "im_a", "re_b", "im_b"]);
                for r in regions {
                    csv.row(&[
                        r.index.to_string(),
                        r.start.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        r.end.map(|x| fmt_f64(x.0)).unwrap_or_default(),
                        fmt_f64(r.a.0.re),
                        fmt_f64(r.a.0.im),
                        fmt_f64(r.b.0.re),
                        fmt_f64(r.b.0.im),
                    ]);
                }
                Ok(csv.finish())
            }
        }
    }

    fn invisibility(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Point {
            k: Fixed,
            kind: &'static str,
            residual: Fixed,
        }
        #[derive(Serialize)]
        struct Out {
            command: &'static str,
            transparent_everywhere: bool,
            points: Vec<Point>,
        }
        let system = self.system()?;
        let grid = self.grid(system.as_ref())?;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let mut opts = InvisibilityOptions::default();
        if let Some(t) = self.flags.tol.or(self.cfg.tolerances.root_residual) {
            opts.zeros.tol_res = t;
        }
        let scan = find_invisibility(system.as_ref(), (lo, hi), &opts).map_err(from_scatter)?;
        let points: Vec<Point> = scan
            .points
            .iter()
            .map(|p| Point {
                k: Fixed(p.k),
                kind: invisibility_kind(p.kind),
                residual: Fixed(p.residual),
            })
            .collect();
        match self.format() {
            Format::Json => to_json(&Out {
                command: "invisibility",
                transparent_everywhere: scan.transparent_everywhere,
                points,
            }),
            Format::Csv => {
                let mut csv = Csv::new(&["k", "kind", "residual"]);
                for p in points {
                    csv.row(&[fmt_f64(p.k.0), p.kind.to_string(), fmt_f64(p.residual.0)]);
                }
                Ok(csv.finish())
            }
        }
    }
}

#[derive(Serialize)]
struct VerdictOut {
    op: String,
    holds: bool,
    max_residual: Option<Fixed>,
    tolerance: Fixed,
    exactness: &'static str,
    tau_max: Option<Fixed>,
    skipped: usize,
}

fn verdict_out(v: &SymmetryVerdict) -> VerdictOut {
    VerdictOut {
        op: v.op.name(),
        holds: v.holds,
        max_residual: v.max_residual.is_finite().then_some(Fixed(v.max_residual)),
        tolerance: Fixed(v.tolerance),
        exactness: match v.exactness {
            Exactness::Exact => "exact",
            Exactness::Broken => "broken",
            Exactness::NotApplicable => "not_applicable",
        },
        tau_max: v.tau_max.filter(|t| t.is_finite()).map(Fixed),
        skipped: v.skipped,
    }
}

fn spectral_kind(k: SpectralKind) -> &'static str {
    match k {
        SpectralKind::SpectralSingularity => "spectral_singularity",
        SpectralKind::TimeReversedSingularity => "time_reversed_singularity",
        SpectralKind::SelfDualSingularity => "self_dual_singularity",
        SpectralKind::Resonance => "resonance",
        SpectralKind::Antiresonance => "antiresonance",
        SpectralKind::BoundState => "bound_state",
        SpectralKind::ComplexEigenvalue => "complex_eigenvalue",
    }
}

fn invisibility_kind(k: InvisibilityKind) -> &'static str {
    match k {
        InvisibilityKind::LeftReflectionless => "left_reflectionless",
        InvisibilityKind::RightReflectionless => "right_reflectionless",
        InvisibilityKind::Transparent => "transparent",
        InvisibilityKind::LeftInvisible => "left_invisible",
        InvisibilityKind::RightInvisible => "right_invisible",
        InvisibilityKind::BidirectionallyInvisible => "bidirectionally_invisible",
    }
}

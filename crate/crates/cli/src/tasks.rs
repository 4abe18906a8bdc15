//! Task dispatch and output files.

use std::f64::consts::TAU;
use std::io;
use std::path::{Path, PathBuf};

use pend3d::conservation::{mechanical_connection, momentum_map};
use pend3d::dynamics::{FullState, Model};
use pend3d::equilibria::{enumerate_lp, enumerate_lr, EnumerationOptions, Equilibrium, Family};
use pend3d::geometry::{exp_so3, tangent_basis};
use pend3d::integrate::{
    build_initial, initial_for_energy, integrate_trajectory, local_linearity, occupancy, poincare_sweep, PoincarePoint,
    PoincareSection, State, SweepJob,
};
use pend3d::linearization::{eigenvalues, fd_jacobian, linearize, rest_state, Rest, Verdict};
use pend3d::reduction::{geometric_phase_reconstruct, geometric_phase_surface, reconstruct, ReducedSample};
use pend3d::{Execution, Rotation, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{Reordering, Scenario, Task};
use crate::svg::{Plot, Series, Style};
use crate::table::{write_atomic, Cell, Table};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Numerical(#[from] pend3d::Error),
}

impl RunError {
    /// 1 for numerical failures, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerical(_) => 1,
            RunError::Io { .. } => 2,
        }
    }
}

/// Writes a task's files into one directory.
struct Sink<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Sink<'_> {
    fn put(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents).map_err(|source| RunError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<(), RunError> {
        self.put(name, &t.to_csv())
    }

    fn plot(&mut self, name: &str, p: &Plot) -> Result<(), RunError> {
        self.put(name, &p.render())
    }
}

const BLUE: &str = "#1f77b4";
const ORANGE: &str = "#d62728";

/// Runs the scenario's task, writing its outputs into `out_dir` (created if
/// missing). Returns the files written, in order.
pub fn run(s: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.to_path_buf(), source })?;
    let mut sink = Sink { dir: out_dir, written: Vec::new() };
    match s.task {
        Task::Simulate => simulate(s, &mut sink)?,
        Task::Equilibria => equilibria(s, &mut sink)?,
        Task::Linearize => linearization(s, &mut sink)?,
        Task::Poincare => poincare(s, &mut sink)?,
        Task::Reconstruct => reconstruction(s, &mut sink)?,
        Task::Phase => phase(s, &mut sink)?,
    }
    Ok(sink.written)
}

/// Initial attitude and angular velocity.
fn initial_conditions(s: &Scenario) -> (Rotation, Vec3) {
    if s.initial.random {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let mut draw = |scale: f64| Vec3::from_fn(|_, _| rng.random_range(-scale..=scale));
        let axis_angle = draw(std::f64::consts::PI);
        let omega = draw(s.initial.random_scale);
        (exp_so3(&axis_angle), omega)
    } else {
        (s.initial_attitude(), s.initial.omega)
    }
}

const TRAJECTORY_HEADER: [&str; 18] = [
    "t", "R11", "R12", "R13", "R21", "R22", "R23", "R31", "R32", "R33", "w1", "w2", "w3", "Gamma1", "Gamma2", "Gamma3", "E",
    "h_momentum",
];

fn rotation_cells(r: Option<&Rotation>) -> Vec<Cell> {
    match r {
        Some(r) => {
            let m = r.matrix();
            (0..3).flat_map(|i| (0..3).map(move |k| Cell::Num(m[(i, k)]))).collect()
        }
        None => vec![Cell::Blank; 9],
    }
}

fn simulate(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.params();
    let (r0, w0) = initial_conditions(s);
    let (full, lp, lr) = build_initial(p, &r0, &w0);
    let state0 = match s.simulate_model {
        Model::Full => State::Full(full),
        Model::Lp => State::Lp(lp),
        Model::Lr => State::Lr(lr),
    };
    let traj = integrate_trajectory(p, &state0, &s.integrator)?;

    let mut table = Table::new(&TRAJECTORY_HEADER);
    for sample in &traj.samples {
        let (r, omega) = match &sample.state {
            State::Full(f) => (Some(&f.r), f.omega),
            State::Lp(l) => (None, l.omega),
            State::Lr(l) => (None, l.omega(p)),
        };
        let gamma = sample.state.gamma();
        let mut row = vec![Cell::Num(sample.t)];
        row.extend(rotation_cells(r));
        row.extend(omega.iter().chain(gamma.iter()).map(|&x| Cell::Num(x)));
        row.push(Cell::Num(sample.invariants.energy));
        row.push(Cell::Num(sample.invariants.h));
        table.push(row);
    }
    sink.table("trajectory.csv", &table)?;

    let first = traj.samples[0].invariants;
    let drift = |value: fn(&pend3d::conservation::InvariantReport) -> f64| -> Vec<(f64, f64)> {
        let base = value(&first);
        traj.samples.iter().map(|x| (x.t, (value(&x.invariants) - base) / base.abs().max(1.0))).collect()
    };
    let plot = Plot {
        title: format!("Invariant drift ({} model, {})", model_name(s.simulate_model), s.integrator.method.name()),
        x_label: "t (s)".into(),
        y_label: "relative drift".into(),
        series: vec![
            Series::new("E", BLUE, Style::Line, drift(|r| r.energy)),
            Series::new("h", ORANGE, Style::Line, drift(|r| r.h)),
        ],
        ..Plot::default()
    };
    sink.plot("invariants.svg", &plot)
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::Full => "full",
        Model::Lp => "lp",
        Model::Lr => "lr",
    }
}

fn hemisphere_series(points: impl Iterator<Item = Vec3>) -> Vec<Series> {
    let (mut upper, mut lower) = (Vec::new(), Vec::new());
    for g in points {
        if g.z < 0.0 { &mut lower } else { &mut upper }.push((g.x, g.y));
    }
    vec![
        Series::new("Gamma3 >= 0", BLUE, Style::Markers, upper),
        Series::new("Gamma3 < 0", ORANGE, Style::Markers, lower),
    ]
}

fn unit_chart(title: String, series: Vec<Series>) -> Plot {
    Plot {
        title,
        x_label: "u = Gamma1".into(),
        y_label: "v = Gamma2".into(),
        x_range: Some((-1.05, 1.05)),
        y_range: Some((-1.05, 1.05)),
        series,
    }
}

pub const EQUILIBRIA_HEADER: [&str; 12] = [
    "family", "alpha", "gamma_e_1", "gamma_e_2", "gamma_e_3", "omega_e_1", "omega_e_2", "omega_e_3", "mu", "residual", "branch",
    "free_coordinate",
];

fn equilibrium_row(e: &Equilibrium) -> Vec<Cell> {
    let mut row = vec![Cell::Text(e.family.label()), e.family.alpha().map_or(Cell::Blank, Cell::Num)];
    row.extend(e.gamma.iter().chain(e.omega.iter()).map(|&x| Cell::Num(x)));
    row.push(Cell::Num(e.mu));
    row.push(Cell::Num(e.residual));
    row.push(Cell::Text(format!("{:?}", e.branch).to_lowercase()));
    row.push(match e.family {
        Family::DegenerateDistinct { gamma, .. } | Family::DegenerateAxisym { gamma, .. } => Cell::Num(gamma),
        _ => Cell::Blank,
    });
    row
}

/// Maps an equilibrium found in the sorted frame back to the file frame.
fn to_file_frame(e: &Equilibrium, r: &Reordering) -> Equilibrium {
    let family = match e.family {
        Family::DegenerateDistinct { axis, gamma } => Family::DegenerateDistinct { axis: r.order[axis - 1] + 1, gamma },
        f => f,
    };
    Equilibrium { gamma: r.vector_back(&e.gamma), omega: r.vector_back(&e.omega), family, ..*e }
}

fn equilibria(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.sorted_params();
    let opts = EnumerationOptions::with_default_grid(&p, s.equilibria.per_interval)?;
    let mut list = match s.equilibria.model {
        Model::Lr => enumerate_lr(&p, &opts)?,
        _ => enumerate_lp(&p, &opts)?,
    };
    if let Some(r) = &s.reordering {
        list = list.iter().map(|e| to_file_frame(e, r)).collect();
    }
    let mut table = Table::new(&EQUILIBRIA_HEADER);
    for e in &list {
        table.push(equilibrium_row(e));
    }
    sink.table("equilibria.csv", &table)?;
    let title = format!("Relative equilibria ({} model, {} rows)", model_name(s.equilibria.model), list.len());
    sink.plot("equilibria.svg", &unit_chart(title, hemisphere_series(list.iter().map(|e| e.gamma))))
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::LyapunovStableCandidate => "stable_candidate",
        Verdict::Unstable => "unstable",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn linearization(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.params();
    let mut table = Table::new(&["model", "rest", "index", "re", "im", "fd_re", "fd_im", "spectral_verdict", "verdict"]);
    let mut series = Vec::new();
    for (rest, color) in [(Rest::Hanging, BLUE), (Rest::Inverted, ORANGE)] {
        let mut points = Vec::new();
        for model in [Model::Full, Model::Lp, Model::Lr] {
            let lm = linearize(p, rest, model)?;
            let fd = eigenvalues(&fd_jacobian(p, &rest_state(p, rest, model)?, s.linearize.fd_step)?);
            let rest_name = match rest {
                Rest::Hanging => "hanging",
                Rest::Inverted => "inverted",
            };
            for (i, (z, f)) in lm.eigenvalues.iter().zip(&fd).enumerate() {
                table.push(vec![
                    model_name(model).into(),
                    rest_name.into(),
                    Cell::Int(i as i64),
                    Cell::Num(z.re),
                    Cell::Num(z.im),
                    Cell::Num(f.re),
                    Cell::Num(f.im),
                    verdict_name(lm.spectral_verdict).into(),
                    verdict_name(lm.verdict).into(),
                ]);
                points.push((z.re, z.im));
            }
        }
        let label = if color == BLUE { "hanging" } else { "inverted" };
        series.push(Series::new(label, color, Style::Markers, points));
    }
    sink.table("linearization.csv", &table)?;
    let plot = Plot {
        title: "Linearized spectra".into(),
        x_label: "Re".into(),
        y_label: "Im".into(),
        series,
        ..Plot::default()
    };
    sink.plot("spectrum.svg", &plot)
}

pub const POINCARE_HEADER: [&str; 6] = ["t", "u", "v", "sign_Gamma3", "E_err", "g_residual"];

fn poincare(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.params();
    let (r0, _) = initial_conditions(s);
    let direction = s.poincare.direction;
    let mut jobs = Vec::with_capacity(s.poincare.energies.len());
    for &energy in &s.poincare.energies {
        let full = initial_for_energy(p, &r0, &direction, energy)?;
        let (_, _, lr) = build_initial(p, &full.r, &full.omega);
        let section = PoincareSection { energy, crossing_tol: s.poincare.crossing_tol, max_crossings: s.poincare.max_crossings };
        jobs.push(SweepJob { initial: lr, section });
    }
    let results = poincare_sweep(p, &jobs, &s.integrator, Execution::Parallel);

    let mut summary = Table::new(&["energy", "points", "occupancy_50", "local_linearity", "max_abs_E_err", "file"]);
    let mut first_error = None;
    for (energy, result) in s.poincare.energies.iter().zip(results) {
        let points: Vec<PoincarePoint> = match result {
            Ok(points) => points,
            Err(e) => {
                first_error.get_or_insert(e);
                continue;
            }
        };
        let stem = format!("poincare_E{energy}");
        let mut table = Table::new(&POINCARE_HEADER);
        for q in &points {
            table.push(vec![
                Cell::Num(q.t),
                Cell::Num(q.u),
                Cell::Num(q.v),
                Cell::Num(q.sign_gamma3),
                Cell::Num(q.energy_error),
                Cell::Num(q.g_residual),
            ]);
        }
        sink.table(&format!("{stem}.csv"), &table)?;
        let title = format!("Poincare section, E = {energy} ({} points)", points.len());
        sink.plot(&format!("{stem}.svg"), &unit_chart(title, hemisphere_series(points.iter().map(|q| q.gamma))))?;
        let max_err = points.iter().map(|q| q.energy_error.abs()).fold(0.0, f64::max);
        summary.push(vec![
            Cell::Num(*energy),
            Cell::Int(points.len() as i64),
            Cell::Int(occupancy(&points, 50) as i64),
            Cell::Num(local_linearity(&points, 8)),
            Cell::Num(max_err),
            Cell::Text(format!("{stem}.csv")),
        ]);
    }
    sink.table("poincare_summary.csv", &summary)?;
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn reconstruction(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.params();
    let (r0, w0) = initial_conditions(s);
    let full0 = FullState::new(r0, w0);
    let traj = integrate_trajectory(p, &State::Full(full0), &s.integrator)?;
    let truth: Vec<(f64, FullState)> = traj
        .samples
        .iter()
        .map(|x| match x.state {
            State::Full(f) => (x.t, f),
            _ => unreachable!("full-model run"),
        })
        .collect();
    let reduced: Vec<ReducedSample> = truth
        .iter()
        .map(|(t, f)| {
            let gamma = f.r.reduced_attitude();
            ReducedSample { t: *t, gamma, gamma_dot: gamma.cross(&f.omega) }
        })
        .collect();
    let mu = momentum_map(p, &full0);
    let rebuilt = reconstruct(p, &reduced, mu, &r0, s.reconstruct.quadrature)?;

    let mut header: Vec<&str> = TRAJECTORY_HEADER[..13].to_vec();
    header.extend(["R_err", "w_err", "momentum_err", "connection_hor"]);
    let mut table = Table::new(&header);
    let (mut r_err, mut w_err) = (Vec::new(), Vec::new());
    for ((t, f), x) in truth.iter().zip(&rebuilt) {
        let dr = (x.state.r.matrix() - f.r.matrix()).norm();
        let dw = (x.state.omega - f.omega).norm();
        let mut row = vec![Cell::Num(*t)];
        row.extend(rotation_cells(Some(&x.state.r)));
        row.extend(x.state.omega.iter().map(|&v| Cell::Num(v)));
        row.push(Cell::Num(dr));
        row.push(Cell::Num(dw));
        row.push(Cell::Num(momentum_map(p, &x.state) - mu));
        row.push(Cell::Num(mechanical_connection(p, &FullState::new(x.lift.r_hor, x.omega_hor))));
        table.push(row);
        r_err.push((*t, dr));
        w_err.push((*t, dw));
    }
    sink.table("reconstruction.csv", &table)?;
    let plot = Plot {
        title: "Reconstruction error against the full model".into(),
        x_label: "t (s)".into(),
        y_label: "error".into(),
        series: vec![Series::new("|R - R_ref|_F", BLUE, Style::Line, r_err), Series::new("|w - w_ref|", ORANGE, Style::Line, w_err)],
        ..Plot::default()
    };
    sink.plot("reconstruction.svg", &plot)
}

/// Closed circle of angular radius `colatitude` about `center`, traversed
/// once for `t ∈ [0, 1]`; the last sample repeats the first.
pub fn circle_loop(center: &Vec3, colatitude: f64, n: usize) -> Vec<ReducedSample> {
    let c = center.normalize();
    let (a, b) = tangent_basis(&c);
    let (sc, cc) = colatitude.sin_cos();
    let mut out: Vec<ReducedSample> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let (s, co) = (TAU * t).sin_cos();
            ReducedSample { t, gamma: cc * c + sc * (co * a + s * b), gamma_dot: TAU * sc * (co * b - s * a) }
        })
        .collect();
    out.push(ReducedSample { t: 1.0, ..out[0] });
    out
}

fn phase(s: &Scenario, sink: &mut Sink) -> Result<(), RunError> {
    let p = s.params();
    let center = s.phase.center;
    let samples = circle_loop(&center, s.phase.colatitude, s.phase.points);
    let points: Vec<Vec3> = samples.iter().map(|x| x.gamma).collect();
    let surface = geometric_phase_surface(p, &points)?;
    let lifted = geometric_phase_reconstruct(p, &samples)?;

    let mut table = Table::new(&["method", "phase", "winding", "total"]);
    table.push(vec!["surface".into(), Cell::Num(surface), Cell::Blank, Cell::Num(surface)]);
    table.push(vec![
        "reconstruction".into(),
        Cell::Num(lifted.principal),
        Cell::Int(lifted.winding),
        Cell::Num(lifted.total),
    ]);
    sink.table("phase.csv", &table)?;
    let title = format!("Loop on S2, geometric phase {:.6} rad", lifted.total);
    sink.plot("loop.svg", &unit_chart(title, hemisphere_series(points.into_iter())))
}

use jacobi_core::averaging::{average_report, AverageMethod, Quantity, SkewPlan};
use jacobi_core::eigen::{default_tol, dos_measure, ids_curve, thouless_rhs_with};
use jacobi_core::measures::{
    convergence_in_probability, cylinder_distance, drr_statistic, empirical_measure, EmpiricalMeasure, Target,
};
use jacobi_core::models::{parse_model, sequence, star_discrepancy, ProfileFunction, SequenceKind};
use jacobi_core::transfer::{cosine_sine, product_solution_mismatch, transfer_product, window_product};
use jacobi_core::weyl::{box_m, lyap_via_m, m_plus, reflectionless_defect};
use jacobi_core::{Coefficients, ComplexEnergy, Error, Window};
use num_complex::Complex;
use rayon::prelude::*;

use crate::config::{Command, MethodArg, QuantityArg, RouteArg, RunConfig};
use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3 with nothing to write.
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "invalid configuration: {m}"),
            RunError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidArgument(_)
            | Error::Descriptor { .. }
            | Error::Io(_)
            | Error::RequiresUpperHalfPlane(_)
            | Error::NegativeImaginary(_)
            | Error::NonPositiveOffDiagonal(_)
    )
}

fn classify(e: Error) -> RunError {
    if is_config_error(&e) {
        RunError::Config(e.to_string())
    } else {
        RunError::Numerical(e.to_string())
    }
}

type Row = Result<Vec<f64>, Error>;

/// Keeps rows up to the first failure. A failure caused by the
/// configuration aborts the run instead.
fn collect(mut table: Table, rows: Vec<Row>) -> Result<Table, RunError> {
    for row in rows {
        match row {
            Ok(r) => table.rows.push(r),
            Err(e) if is_config_error(&e) => return Err(RunError::Config(e.to_string())),
            Err(e) => {
                table.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(table)
}

struct Setup {
    j: Coefficients,
    profile: Option<ProfileFunction>,
}

fn setup(c: &RunConfig) -> Result<Setup, RunError> {
    let profile = c
        .profile
        .as_deref()
        .map(ProfileFunction::parse)
        .transpose()
        .map_err(classify)?;
    let j = parse_model(&c.model, profile.as_ref()).map_err(classify)?;
    Ok(Setup { j, profile })
}

fn z(e: f64, eta: f64) -> Result<ComplexEnergy, Error> {
    ComplexEnergy::new(e, eta)
}

/// `[0, N)` with the step out of the last site.
fn window(j: &Coefficients, n: usize) -> (Window, f64) {
    (j.window(0, n), j.a(n as i64 - 1))
}

pub fn run(c: &RunConfig) -> Result<Table, RunError> {
    c.validate().map_err(RunError::Config)?;
    let Setup { j, profile } = setup(c)?;
    let energies = c.energies();
    match c.command {
        Command::Lyapunov => {
            let n = c.single_n();
            let (w, a_last) = window(&j, n);
            let rows = energies
                .par_iter()
                .map(|&e| Ok(vec![e, window_product(&w, z(e, c.eta)?, a_last).lyapunov()]))
                .collect();
            collect(Table::new(&["E", "L"]), rows)
        }
        Command::Ids => {
            let w: Window = j.window(0, c.single_n());
            let k = ids_curve(&w, &energies);
            let rows = energies.iter().zip(k).map(|(&e, k)| Ok(vec![e, k])).collect();
            collect(Table::new(&["E", "k"]), rows)
        }
        Command::ThoulessCheck => thouless_check(c, &j, &energies),
        Command::Mfunction => {
            let rows = energies
                .par_iter()
                .map(|&e| {
                    let m = m_plus(&j, z(e, c.eta)?, c.tol)?.value;
                    Ok(vec![e, m.re, m.im])
                })
                .collect();
            collect(Table::new(&["E", "re", "im"]), rows)
        }
        Command::Average => average(c, &j, profile.as_ref(), &energies),
        Command::Drr => {
            let rows =
                c.n.iter()
                    .map(|&n| Ok(vec![n as f64, drr_statistic(&j, n, c.eps)?]))
                    .collect();
            collect(Table::new(&["N", "value"]), rows)
        }
        Command::MeasureDist => measure_dist(c, &j, profile.as_ref()),
        Command::Equidist => {
            let max = c.n.iter().copied().max().unwrap_or(1);
            let points = sequence(&SequenceKind::NRho(c.rho), max);
            let rows =
                c.n.iter()
                    .map(|&n| Ok(vec![n as f64, star_discrepancy(&points[..n])]))
                    .collect();
            collect(Table::new(&["N", "discrepancy"]), rows)
        }
        Command::Reflectionless => {
            let rows = energies
                .par_iter()
                .map(|&e| Ok(vec![e, reflectionless_defect(&j, e, c.eta, c.tol)?]))
                .collect();
            collect(Table::new(&["E", "defect"]), rows)
        }
        Command::Identities => identities(c, &j, &energies),
    }
}

fn thouless_check(c: &RunConfig, j: &Coefficients, energies: &[f64]) -> Result<Table, RunError> {
    let n = c.single_n();
    let (w, a_last) = window(j, n);
    let nu = match c.route {
        RouteArg::Mfunction => None,
        _ => Some(dos_measure(j, n, default_tol(j))),
    };
    let rows = energies
        .par_iter()
        .map(|&e| {
            let zz = z(e, c.eta)?;
            let (lhs, rhs) = match c.route {
                RouteArg::Asymptotic => (
                    window_product(&w, zz, a_last).lyapunov(),
                    thouless_rhs_with(nu.as_ref().unwrap(), j, zz)?,
                ),
                RouteArg::Exact => (
                    cosine_sine(j, zz, n).c.log_abs() / n as f64,
                    thouless_rhs_with(nu.as_ref().unwrap(), j, zz)?,
                ),
                RouteArg::Mfunction => (window_product(&w, zz, a_last).lyapunov(), lyap_via_m(j, zz, n, c.tol)?),
            };
            Ok(vec![e, lhs, rhs, (lhs - rhs).abs()])
        })
        .collect();
    collect(Table::new(&["E", "lhs", "rhs", "gap"]), rows)
}

fn average(
    c: &RunConfig,
    j: &Coefficients,
    profile: Option<&ProfileFunction>,
    energies: &[f64],
) -> Result<Table, RunError> {
    let f = profile.ok_or_else(|| RunError::Config("average needs --profile".into()))?;
    let quantity = match c.quantity {
        QuantityArg::Lyapunov => Quantity::Lyapunov,
        QuantityArg::Ids => Quantity::Ids,
    };
    let method = match c.method {
        MethodArg::Quadrature => AverageMethod::Quadrature { nodes: c.nodes },
        MethodArg::Skew => AverageMethod::SkewMonteCarlo(SkewPlan {
            r: c.r,
            n_alpha: c.n_alpha,
            n_omega: c.n_omega,
            n_inner: c.n_inner,
            seed: c.seed,
        }),
    };
    let report = average_report(j, f, energies, quantity, c.single_n(), method).map_err(classify)?;
    let mut table = Table::new(&["E", "direct", "averaged", "gap"]);
    table.notes.push(format!(
        "averaged error per row: {}",
        report
            .rhs_error
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(",")
    ));
    let gaps = report.gap();
    let rows = (0..energies.len())
        .map(|i| Ok(vec![report.energies[i], report.lhs[i], report.rhs[i], gaps[i]]))
        .collect();
    collect(table, rows)
}

/// Period of the models whose invariant measure is a finite set of atoms.
fn period_of(desc: &str) -> Option<usize> {
    let (tag, rest) = desc.split_once(':').unwrap_or((desc, ""));
    match tag {
        "free" | "constant" => Some(1),
        "periodic" => Some(rest.split(',').count()),
        _ => None,
    }
}

fn measure_dist(c: &RunConfig, j: &Coefficients, profile: Option<&ProfileFunction>) -> Result<Table, RunError> {
    let mut table = Table::new(&["N", "distance"]);
    let rows = match c.target.as_str() {
        "exact" => {
            let period = period_of(&c.model)
                .ok_or_else(|| RunError::Config(format!("--target exact needs a periodic model, got `{}`", c.model)))?;
            let exact = EmpiricalMeasure::periodic(j, period, c.k).map_err(classify)?;
            table.notes.push(format!(
                "distance: moment pseudometric of degree {} against the {period}-atom invariant measure",
                c.degree
            ));
            c.n.iter()
                .map(|&n| {
                    let emp = empirical_measure(j, n, c.k)?;
                    Ok(vec![n as f64, cylinder_distance(&emp, &exact, c.degree)?])
                })
                .collect()
        }
        t => {
            let target = if t == "free-torus" {
                Target::FreeTorus
            } else {
                Target::SingleOperator(parse_model(t, profile).map_err(classify)?)
            };
            table.notes.push(format!(
                "distance: fraction of shifts at truncated distance >= {} from the target, radius {}",
                c.eps, c.k
            ));
            c.n.iter()
                .map(|&n| Ok(vec![n as f64, convergence_in_probability(j, &target, n, c.eps, c.k)?]))
                .collect()
        }
    };
    collect(table, rows)
}

/// Unit determinant relative to `|P|²`, product against the cosine and
/// sine solutions, the box-m ratio `c(N+1)/c(N) = −1/(a(N) m_N)`, and the
/// margin of `log|c| ≤ log|P|`.
fn identities(c: &RunConfig, j: &Coefficients, energies: &[f64]) -> Result<Table, RunError> {
    let n = c.single_n();
    let rows = energies
        .par_iter()
        .map(|&e| {
            let zz = z(e, c.eta)?;
            let p = transfer_product(j, zz, n);
            let det = (p.normalized_det() - Complex::new((-2.0 * p.log_norm()).exp(), 0.0)).norm();
            let cs = cosine_sine(j, zz, n);
            let mismatch = product_solution_mismatch(&p, &cs, j.a(n as i64 - 1));
            let ratio = if c.eta > 0.0 {
                let m = box_m(j, zz, n)?;
                let next = cosine_sine(j, zz, n + 1).c;
                let got = next.value / cs.c.value * (next.logscale - cs.c.logscale).exp();
                let want = -1.0 / (j.a(n as i64) * m);
                (got - want).norm() / want.norm()
            } else {
                f64::NAN
            };
            Ok(vec![e, det, mismatch, ratio, p.log_norm() - cs.c.log_abs()])
        })
        .collect();
    collect(Table::new(&["E", "det", "mismatch", "c_ratio", "entry_margin"]), rows)
}

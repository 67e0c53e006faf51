//! Side-by-side solver runs, oracle comparison and history export.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::adgmres::adgmres_restarted;
use crate::densela::DenseVector;
use crate::dgmres::{dgmres_restarted, RunHistory, SolverConfig, SolverError};
use crate::oracle::{drazin_solution, DEFAULT_RANK_TOL};
use crate::problems::Problem;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{run}: {error}")]
    Solver { run: String, error: SolverError },
    #[error("invalid run '{0}' (expected method,m,k with method dgmres or adgmres)")]
    BadRun(String),
    #[error("no solver runs configured")]
    NoRuns,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dgmres,
    Adgmres,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dgmres" => Ok(Method::Dgmres),
            "adgmres" => Ok(Method::Adgmres),
            other => Err(format!("unknown method '{other}' (expected dgmres or adgmres)")),
        }
    }
}

/// One configured solver: method, restart size `m` and augmentation count `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverRun {
    pub method: Method,
    pub m: usize,
    pub k: usize,
}

impl SolverRun {
    pub fn dgmres(m: usize) -> Self {
        SolverRun {
            method: Method::Dgmres,
            m,
            k: 0,
        }
    }

    pub fn adgmres(m: usize, k: usize) -> Self {
        SolverRun {
            method: Method::Adgmres,
            m,
            k,
        }
    }

    /// Comma-free label used in reports and CSV files.
    pub fn label(&self) -> String {
        match self.method {
            Method::Dgmres => format!("dgmres_m{}", self.m),
            Method::Adgmres => format!("adgmres_m{}_k{}", self.m, self.k),
        }
    }
}

impl fmt::Display for SolverRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method {
            Method::Dgmres => write!(f, "DGMRES({})", self.m),
            Method::Adgmres => write!(f, "ADGMRES({},{})", self.m, self.k),
        }
    }
}

impl FromStr for SolverRun {
    type Err = ReportError;

    /// `method,m,k`, e.g. `adgmres,6,1` or `dgmres,7,0`; `k` may be omitted
    /// for DGMRES.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ReportError::BadRun(s.to_string());
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad());
        }
        let method: Method = parts[0].parse().map_err(|_| bad())?;
        let m: usize = parts[1].parse().map_err(|_| bad())?;
        let k: usize = match parts.get(2) {
            Some(t) => t.parse().map_err(|_| bad())?,
            None => 0,
        };
        if method == Method::Dgmres && k != 0 {
            return Err(bad());
        }
        Ok(SolverRun { method, m, k })
    }
}

#[derive(Clone, Debug)]
pub struct CompareOptions {
    pub eps: f64,
    pub max_cycles: usize,
    /// The dense oracle runs only for `n <= oracle_size_cap`.
    pub oracle_size_cap: usize,
    pub stagnation_window: usize,
    pub stagnation_factor: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            eps: SolverConfig::DEFAULT_EPS,
            max_cycles: SolverConfig::DEFAULT_MAX_CYCLES,
            oracle_size_cap: 500,
            stagnation_window: 50,
            stagnation_factor: 10.0,
        }
    }
}

/// Not converged, and the relative seminorm improved by less than `factor`
/// over the last `window` cycles (or over the whole run if it is shorter).
pub fn is_stagnated(history: &RunHistory, window: usize, factor: f64) -> bool {
    let n = history.cycles();
    if history.converged || n == 0 {
        return false;
    }
    let earlier = history.relative_at(n.saturating_sub(window)).unwrap_or(f64::INFINITY);
    let last = history.final_relative();
    last * factor > earlier
}

/// First cycle `N >= window` at which the run had not yet reached `eps`
/// and the relative seminorm improved by less than `factor` over cycles
/// `N - window ..= N`.
pub fn first_stagnation_cycle(history: &RunHistory, eps: f64, window: usize, factor: f64) -> Option<usize> {
    (window.max(1)..=history.cycles()).find(|&n| {
        let now = history.relative_at(n).unwrap_or(0.0);
        let before = history.relative_at(n - window).unwrap_or(f64::INFINITY);
        now >= eps && now * factor > before
    })
}

#[derive(Clone, Debug)]
pub struct SolverOutcome {
    pub run: SolverRun,
    pub history: RunHistory,
    /// `||x - A^D b|| / ||A^D b||` (absolute when `A^D b = 0`).
    pub error_vs_oracle: Option<f64>,
    pub cycles_to_tolerance: Option<usize>,
    pub stagnated: bool,
}

impl SolverOutcome {
    pub fn total_matvecs(&self) -> usize {
        self.history.records.last().map_or(0, |r| r.matvecs)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub problem: String,
    pub index_a: usize,
    pub computed_index: Option<usize>,
    pub eps: f64,
    pub oracle_solution: Option<DenseVector>,
    pub outcomes: Vec<SolverOutcome>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.outcomes.iter().all(|o| o.history.converged)
    }
}

fn fairness_warnings(runs: &[SolverRun]) -> Vec<String> {
    let mut out = Vec::new();
    for d in runs.iter().filter(|r| r.method == Method::Dgmres) {
        for a in runs.iter().filter(|r| r.method == Method::Adgmres) {
            if d.m != a.m + a.k {
                out.push(format!(
                    "{d} and {a} use different subspace sizes ({} vs {} + {})",
                    d.m, a.m, a.k
                ));
            }
        }
    }
    out
}

fn run_one(problem: &Problem, run: SolverRun, cfg: &SolverConfig) -> Result<RunHistory, SolverError> {
    match run.method {
        Method::Dgmres => dgmres_restarted(&problem.a, &problem.b, &problem.x0, cfg),
        Method::Adgmres => adgmres_restarted(&problem.a, &problem.b, &problem.x0, run.k, cfg),
    }
}

/// Runs every configured solver from the problem's `x0` (concurrently, one
/// thread per solver) and compares the results with the dense oracle.
pub fn run_compare(problem: &Problem, runs: &[SolverRun], opts: &CompareOptions) -> Result<RunReport, ReportError> {
    if runs.is_empty() {
        return Err(ReportError::NoRuns);
    }
    let configs: Vec<SolverConfig> = runs
        .iter()
        .map(|r| {
            let cfg = SolverConfig::new(problem.index_a, r.m)
                .with_eps(opts.eps)
                .with_max_cycles(opts.max_cycles);
            cfg.validate().map(|_| cfg).map_err(|error| ReportError::Solver {
                run: r.to_string(),
                error,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut warnings = fairness_warnings(runs);
    if let Some(ci) = problem.computed_index {
        if ci != problem.index_a {
            warnings.push(format!(
                "given index {} differs from the computed index {ci}",
                problem.index_a
            ));
        }
    }

    let results: Vec<Result<RunHistory, SolverError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .zip(&configs)
            .map(|(run, cfg)| scope.spawn(move || run_one(problem, *run, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let oracle_solution = if problem.a.rows() <= opts.oracle_size_cap {
        match drazin_solution(&problem.a, &problem.b, DEFAULT_RANK_TOL) {
            Ok(x) => Some(x),
            Err(e) => {
                warnings.push(format!("oracle unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut outcomes = Vec::with_capacity(runs.len());
    for (run, result) in runs.iter().zip(results) {
        let history = result.map_err(|error| ReportError::Solver {
            run: run.to_string(),
            error,
        })?;
        let error_vs_oracle = oracle_solution.as_ref().map(|xd| {
            let err = history.final_x.sub(xd).norm();
            let scale = xd.norm();
            if scale > 0.0 {
                err / scale
            } else {
                err
            }
        });
        let cycles_to_tolerance = history.converged.then(|| history.cycles());
        let stagnated = is_stagnated(&history, opts.stagnation_window, opts.stagnation_factor);
        outcomes.push(SolverOutcome {
            run: *run,
            history,
            error_vs_oracle,
            cycles_to_tolerance,
            stagnated,
        });
    }
    Ok(RunReport {
        problem: problem.label.clone(),
        index_a: problem.index_a,
        computed_index: problem.computed_index,
        eps: opts.eps,
        oracle_solution,
        outcomes,
        warnings,
    })
}

pub const CSV_HEADER: &str = "solver,cycle,seminorm,relative_seminorm,wall_time_s";

/// Writes one row per cycle per solver, in configured solver order.
pub fn write_history_csv(report: &RunReport, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for o in &report.outcomes {
        let label = o.run.label();
        for r in &o.history.records {
            writeln!(
                out,
                "{label},{},{:.16e},{:.16e},{:.16e}",
                r.cycle, r.seminorm, r.relative, r.wall_time
            )?;
        }
    }
    Ok(())
}

pub fn export_history(report: &RunReport, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_history_csv(report, &mut w)?;
    w.flush()
}

/// Gnuplot-ready data: one block per solver (`# label` then `cycle relative`
/// lines), blocks separated by two blank lines.
pub fn write_plot_data(report: &RunReport, mut out: impl Write) -> io::Result<()> {
    for (i, o) in report.outcomes.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
            writeln!(out)?;
        }
        writeln!(out, "# {}", o.run.label())?;
        writeln!(out, "0 {:.16e}", o.history.relative_at(0).unwrap_or(0.0))?;
        for r in &o.history.records {
            writeln!(out, "{} {:.16e}", r.cycle, r.relative)?;
        }
    }
    Ok(())
}

pub fn export_plot_data(report: &RunReport, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_plot_data(report, &mut w)?;
    w.flush()
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub solver: String,
    pub cycle: usize,
    pub seminorm: f64,
    pub relative: f64,
    pub wall_time: f64,
}

/// Parses text produced by [`write_history_csv`].
pub fn parse_history_csv(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err("missing header".into());
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(format!("row {}: expected 5 fields", i + 2));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 2));
            Ok(CsvRow {
                solver: f[0].to_string(),
                cycle: f[1].parse().map_err(|e| format!("row {}: {e}", i + 2))?,
                seminorm: num(f[2])?,
                relative: num(f[3])?,
                wall_time: num(f[4])?,
            })
        })
        .collect()
}

/// Human-readable summary table.
pub fn summary(report: &RunReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("problem {}  index a = {}", report.problem, report.index_a));
    if let Some(ci) = report.computed_index {
        s.push_str(&format!(" (computed {ci})"));
    }
    s.push_str(&format!("  eps = {:e}\n", report.eps));
    s.push_str(&format!(
        "{:<16} {:>8} {:>10} {:>12} {:>10} {:>12} {:>10}\n",
        "solver", "cycles", "converged", "relative", "matvecs", "err_oracle", "stagnated"
    ));
    for o in &report.outcomes {
        let err = o.error_vs_oracle.map_or("-".to_string(), |e| format!("{e:.3e}"));
        s.push_str(&format!(
            "{:<16} {:>8} {:>10} {:>12.4e} {:>10} {:>12} {:>10}\n",
            o.run.to_string(),
            o.history.cycles(),
            o.history.converged,
            o.history.final_relative(),
            o.total_matvecs(),
            err,
            o.stagnated
        ));
        let fb = o.history.fallback_cycles();
        if !fb.is_empty() {
            s.push_str(&format!("  {} cycles fell back to plain DGMRES\n", fb.len()));
        }
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

/// Relative seminorm of each solver at the given cycle counts.
pub fn checkpoint_table(report: &RunReport, checkpoints: &[usize]) -> String {
    let mut s = format!("{:<16}", "cycles");
    for c in checkpoints {
        s.push_str(&format!(" {c:>12}"));
    }
    s.push('\n');
    for o in &report.outcomes {
        s.push_str(&format!("{:<16}", o.run.to_string()));
        for &c in checkpoints {
            match o.history.relative_at(c) {
                Some(v) => s.push_str(&format!(" {v:>12.4e}")),
                None => s.push_str(&format!(" {:>12}", "-")),
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate_example, ExampleId};

    fn ex4_problem() -> Problem {
        let ex = generate_example(ExampleId::Ex4);
        Problem::from_parts("ex4", ex.a, ex.b, ex.index_a)
    }

    #[test]
    fn run_parsing_and_labels() {
        let r: SolverRun = "adgmres,6,1".parse().unwrap();
        assert_eq!(r, SolverRun::adgmres(6, 1));
        assert_eq!(r.label(), "adgmres_m6_k1");
        let d: SolverRun = "dgmres,7".parse().unwrap();
        assert_eq!(d.label(), "dgmres_m7");
        assert_eq!("dgmres,7,0".parse::<SolverRun>().unwrap(), d);
        assert!("dgmres,7,1".parse::<SolverRun>().is_err());
        assert!("gmres,3,0".parse::<SolverRun>().is_err());
        assert!("adgmres,x,1".parse::<SolverRun>().is_err());
    }

    #[test]
    fn fairness_warning_only_on_mismatch() {
        assert!(fairness_warnings(&[SolverRun::adgmres(6, 1), SolverRun::dgmres(7)]).is_empty());
        assert_eq!(
            fairness_warnings(&[SolverRun::adgmres(4, 1), SolverRun::dgmres(7)]).len(),
            1
        );
    }

    #[test]
    fn invalid_restart_names_constraint() {
        let err = run_compare(&ex4_problem(), &[SolverRun::dgmres(1)], &CompareOptions::default()).unwrap_err();
        assert!(err.to_string().contains("must exceed the index"));
    }

    #[test]
    fn csv_row_counts_and_round_trip() {
        let opts = CompareOptions {
            max_cycles: 3,
            eps: f64::MIN_POSITIVE,
            ..CompareOptions::default()
        };
        let report = run_compare(&ex4_problem(), &[SolverRun::dgmres(2)], &opts).unwrap();
        let mut buf = Vec::new();
        write_history_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        let rows = parse_history_csv(&text).unwrap();
        for (row, rec) in rows.iter().zip(&report.outcomes[0].history.records) {
            assert_eq!(row.relative.to_bits(), rec.relative.to_bits());
            assert_eq!(row.seminorm.to_bits(), rec.seminorm.to_bits());
        }

        let opts = CompareOptions { max_cycles: 50, ..opts };
        let report = run_compare(&ex4_problem(), &[SolverRun::dgmres(2), SolverRun::adgmres(2, 1)], &opts).unwrap();
        let mut buf = Vec::new();
        write_history_csv(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 101);
    }

    #[test]
    fn zero_rhs_converges_everywhere() {
        let mut p = ex4_problem();
        p.b = DenseVector::zeros(4);
        let report = run_compare(
            &p,
            &[SolverRun::dgmres(2), SolverRun::adgmres(2, 1)],
            &CompareOptions::default(),
        )
        .unwrap();
        assert!(report.all_converged());
        assert!(report.oracle_solution.unwrap().is_zero());
        for o in &report.outcomes {
            assert_eq!(o.cycles_to_tolerance, Some(0));
            assert!(!o.stagnated);
        }
    }

    #[test]
    fn duplicated_runs_are_identical() {
        let opts = CompareOptions {
            max_cycles: 40,
            ..CompareOptions::default()
        };
        let report = run_compare(
            &ex4_problem(),
            &[SolverRun::adgmres(2, 1), SolverRun::adgmres(2, 1)],
            &opts,
        )
        .unwrap();
        let (a, b) = (&report.outcomes[0].history, &report.outcomes[1].history);
        assert_eq!(a.cycles(), b.cycles());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.seminorm.to_bits(), y.seminorm.to_bits());
        }
        assert_eq!(a.final_x, b.final_x);
    }

    #[test]
    fn stagnation_rule() {
        let mk = |rel: &[f64], converged| RunHistory {
            records: rel
                .iter()
                .enumerate()
                .map(|(i, &r)| crate::dgmres::CycleRecord {
                    cycle: i + 1,
                    seminorm: r,
                    relative: r,
                    wall_time: 0.0,
                    matvecs: 0,
                    fallback: false,
                })
                .collect(),
            converged,
            final_x: DenseVector::zeros(1),
            initial_seminorm: 1.0,
            reference_norm: 1.0,
        };
        let flat = vec![0.5; 60];
        assert!(is_stagnated(&mk(&flat, false), 50, 10.0));
        assert!(!is_stagnated(&mk(&flat, true), 50, 10.0));
        let falling: Vec<f64> = (0..60).map(|i| 0.9f64.powi(i)).collect();
        assert!(!is_stagnated(&mk(&falling, false), 50, 10.0));
    }
}

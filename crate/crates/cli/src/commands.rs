use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use bose_mi::analysis::{
    fit_log_scaling, run_sweep, PartitionRule, SweepOptions, SweepRow, SweepSpec,
};
use bose_mi::correlation::{mutual_information_with, EntropyReport};
use bose_mi::dispersion::{dispersion_table_with, DispersionSource, HoppingKind, HoppingModel};
use bose_mi::thermo::{critical_temperature, solve_mu_with, DEFAULT_MU_TOL};
use bose_mi::zero_temp::{
    entanglement_entropy_exact, entropy_binomial_asymptotic, entropy_poisson_asymptotic,
    schmidt_spectrum,
};

use crate::args::{
    Cli, Command, Format, ModelArgs, ModelName, PartitionArgs, PartitionChoice, TemperatureArgs,
};
use crate::config::read;
use crate::error::{Error, Result};
use crate::table::{fmt_float, read_records, Cell, Table};

const REPORT_COLUMNS: &[&str] = &[
    "beta",
    "T",
    "l",
    "la",
    "lb",
    "e_a",
    "e_b",
    "s",
    "e_m",
    "mu",
    "density",
    "condensate",
    "status",
    "message",
];

/// Execute the parsed command and return the rendered table.
pub fn run(cli: &Cli) -> Result<String> {
    let format = cli.format.unwrap_or(Format::Csv);
    let table = match &cli.command {
        Command::Dispersion {
            model,
            sites,
            thermo_limit,
        } => dispersion(model, *sites, *thermo_limit)?,
        Command::Tc { model, n } => tc(model, *n)?,
        Command::Mu {
            model,
            sites,
            temperature,
            n,
            tol,
            thermo_limit,
        } => mu(model, *sites, temperature, *n, *tol, *thermo_limit)?,
        Command::ZeroEntropy {
            particles,
            la,
            sites,
        } => {
            let particles = particles
                .as_ref()
                .ok_or_else(|| Error::usage("--particles is required"))?;
            zero_entropy(&particles.0, la.unwrap_or(1), sites.unwrap_or(2))?
        }
        Command::MutualInfo {
            model,
            sites,
            temperature,
            n,
            partition,
            tol,
            thermo_limit,
        } => mutual_info(
            model,
            *sites,
            temperature,
            *n,
            partition,
            *tol,
            *thermo_limit,
        )?,
        Command::Sweep {
            model,
            sizes,
            sites,
            temperature,
            n,
            partition,
            tol,
            thermo_limit,
            workers,
            resume,
        } => {
            let sizes: Vec<usize> = match (sizes, sites) {
                (Some(ladder), _) => ladder.0.iter().map(|&v| v as usize).collect(),
                (None, Some(l)) => vec![*l],
                (None, None) => return Err(Error::usage("--sizes or --L is required")),
            };
            let kind = kind(model)?;
            let t = model.hopping.unwrap_or(1.0);
            let n = n.unwrap_or(1.0);
            let mut spec = SweepSpec::new(kind, betas(temperature, kind, t, n)?, sizes);
            spec.t = t;
            spec.n_target = n;
            spec.partition = partition_rule(partition);
            spec.source = source(*thermo_limit);
            spec.tol = tol.unwrap_or(DEFAULT_MU_TOL);
            let prior = match (resume, &cli.output) {
                (false, _) => None,
                (true, None) => return Err(Error::usage("--resume needs --output")),
                (true, Some(path)) if !path.exists() => None,
                (true, Some(path)) => Some(read(path)?),
            };
            sweep(&spec, workers.unwrap_or(0), prior.as_deref())?
        }
        Command::Fit {
            input,
            beta,
            window,
        } => {
            let text = match input.as_deref() {
                None => read_stdin()?,
                Some(p) if p == Path::new("-") => read_stdin()?,
                Some(p) => read(p)?,
            };
            fit(&text, *beta, window.map(|w| (w.0, w.1)))?
        }
    };
    Ok(table.render(format))
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| Error::io("stdin", e))?;
    Ok(s)
}

fn kind(args: &ModelArgs) -> Result<HoppingKind> {
    let model = args
        .model
        .ok_or_else(|| Error::usage("--model is required"))?;
    match (model, args.gamma) {
        (ModelName::Powerlaw, Some(g)) => Ok(HoppingKind::power_law(g)?),
        (ModelName::Powerlaw, None) => Err(Error::usage("--model powerlaw needs --gamma")),
        (_, Some(_)) => Err(Error::usage("--gamma applies only to --model powerlaw")),
        (ModelName::Nn, None) => Ok(HoppingKind::NearestNeighbor),
        (ModelName::Infinite, None) => Ok(HoppingKind::InfiniteRange),
    }
}

fn model(args: &ModelArgs, sites: Option<usize>) -> Result<HoppingModel> {
    let sites = sites.ok_or_else(|| Error::usage("--L is required"))?;
    Ok(HoppingModel::new(
        kind(args)?,
        args.hopping.unwrap_or(1.0),
        sites,
    )?)
}

fn source(thermo_limit: bool) -> DispersionSource {
    if thermo_limit {
        DispersionSource::ThermodynamicLimit
    } else {
        DispersionSource::FiniteLattice
    }
}

fn positive(values: &[f64], flag: &str) -> Result<()> {
    match values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        Some(v) => Err(Error::usage(format!(
            "{flag} values must be positive and finite, got {v}"
        ))),
        None => Ok(()),
    }
}

fn betas(args: &TemperatureArgs, kind: HoppingKind, t: f64, n: f64) -> Result<Vec<f64>> {
    match (&args.beta, &args.temperature, &args.relative) {
        (Some(b), _, _) => {
            positive(b, "--beta")?;
            Ok(b.clone())
        }
        (None, Some(temps), _) => {
            positive(temps, "--T")?;
            Ok(temps.iter().map(|x| 1.0 / x).collect())
        }
        (None, None, Some(rel)) => {
            positive(rel, "--T-rel")?;
            let tc = critical_temperature(kind, t, n)?.ok_or_else(|| {
                Error::usage("--T-rel needs a model with a finite condensation temperature")
            })?;
            Ok(rel.iter().map(|r| 1.0 / (r * tc.tc)).collect())
        }
        (None, None, None) => Err(Error::usage("one of --beta, --T or --T-rel is required")),
    }
}

fn partition_rule(args: &PartitionArgs) -> PartitionRule {
    match (args.la, args.partition) {
        (Some(la), _) => PartitionRule::Fixed(la),
        (None, Some(PartitionChoice::Fraction(f))) => PartitionRule::Fraction(f),
        (None, Some(PartitionChoice::Equal)) | (None, None) => PartitionRule::Equal,
    }
}

fn dispersion(args: &ModelArgs, sites: Option<usize>, thermo_limit: bool) -> Result<Table> {
    let model = model(args, sites)?;
    let table = dispersion_table_with(&model, source(thermo_limit))?;
    let mut out = Table::new(&["m", "k", "eps"]);
    for (m, (k, eps)) in table.k.iter().zip(&table.eps).enumerate() {
        out.push(vec![
            Cell::Int(m as u64),
            Cell::Float(*k),
            Cell::Float(*eps),
        ]);
    }
    Ok(out)
}

fn tc(args: &ModelArgs, n: Option<f64>) -> Result<Table> {
    let kind = kind(args)?;
    let t = args.hopping.unwrap_or(1.0);
    let n = n.unwrap_or(1.0);
    let gamma = kind.gamma().map_or(Cell::Empty, Cell::Float);
    let mut out = Table::new(&["model", "gamma", "t", "n", "tc", "beta_c", "method"]);
    let (tc, beta_c, method) = match critical_temperature(kind, t, n)? {
        Some(r) => (Cell::Float(r.tc), Cell::Float(r.beta_c), r.method.name()),
        None => (Cell::Empty, Cell::Empty, "no finite-T BEC"),
    };
    out.push(vec![
        Cell::text(kind.name()),
        gamma,
        Cell::Float(t),
        Cell::Float(n),
        tc,
        beta_c,
        Cell::text(method),
    ]);
    Ok(out)
}

fn mu(
    args: &ModelArgs,
    sites: Option<usize>,
    temperature: &TemperatureArgs,
    n: Option<f64>,
    tol: Option<f64>,
    thermo_limit: bool,
) -> Result<Table> {
    let model = model(args, sites)?;
    let n = n.unwrap_or(1.0);
    let mut out = Table::new(&["beta", "T", "l", "mu", "gap", "density", "condensate"]);
    for beta in betas(temperature, model.kind(), model.t(), n)? {
        let s = solve_mu_with(
            &model,
            beta,
            n,
            tol.unwrap_or(DEFAULT_MU_TOL),
            source(thermo_limit),
        )?;
        out.push(vec![
            Cell::Float(beta),
            Cell::Float(1.0 / beta),
            Cell::Int(model.sites() as u64),
            Cell::Float(s.mu()),
            Cell::Float(s.gap()),
            Cell::Float(s.density()),
            Cell::Float(s.condensate()),
        ]);
    }
    Ok(out)
}

fn zero_entropy(particles: &[u64], la: usize, l: usize) -> Result<Table> {
    let mut out = Table::new(&[
        "n",
        "la",
        "l",
        "n_a",
        "e_exact",
        "e_gauss",
        "e_poisson",
        "slope",
    ]);
    let mut last: Option<(f64, f64)> = None;
    for &n in particles {
        let exact = entanglement_entropy_exact(&schmidt_spectrum(n, la, l)?);
        let nf = n as f64;
        let mean = nf * la as f64 / l as f64;
        let slope = last.map_or(Cell::Empty, |(pn, pe)| {
            Cell::Float((exact - pe) / (nf.ln() - pn.ln()))
        });
        out.push(vec![
            Cell::Int(n),
            Cell::Int(la as u64),
            Cell::Int(l as u64),
            Cell::Float(mean),
            Cell::Float(exact),
            Cell::Float(entropy_binomial_asymptotic(nf, la, l)?),
            Cell::Float(entropy_poisson_asymptotic(mean)?),
            slope,
        ]);
        last = Some((nf, exact));
    }
    Ok(out)
}

fn report_row(
    beta: f64,
    l: usize,
    la: Option<usize>,
    result: &std::result::Result<EntropyReport, bose_mi::Error>,
) -> Vec<Cell> {
    let int = |v: Option<usize>| v.map_or(Cell::Empty, |x| Cell::Int(x as u64));
    let mut row = vec![
        Cell::Float(beta),
        Cell::Float(1.0 / beta),
        Cell::Int(l as u64),
    ];
    match result {
        Ok(r) => {
            row.extend([Cell::Int(r.la as u64), Cell::Int(r.lb as u64)]);
            row.extend([r.e_a, r.e_b, r.s, r.e_m, r.mu, r.density, r.condensate].map(Cell::Float));
            row.extend([Cell::text("ok"), Cell::Empty]);
        }
        Err(e) => {
            row.extend([int(la), int(la.map(|a| l - a))]);
            row.extend(std::iter::repeat_n(Cell::Empty, 7));
            row.extend([
                Cell::text(e.tag()),
                Cell::text(e.to_string().replace('\n', " ")),
            ]);
        }
    }
    row
}

#[allow(clippy::too_many_arguments)]
fn mutual_info(
    args: &ModelArgs,
    sites: Option<usize>,
    temperature: &TemperatureArgs,
    n: Option<f64>,
    partition: &PartitionArgs,
    tol: Option<f64>,
    thermo_limit: bool,
) -> Result<Table> {
    let model = model(args, sites)?;
    let n = n.unwrap_or(1.0);
    let la = partition_rule(partition).subsystem(model.sites())?;
    let mut out = Table::new(REPORT_COLUMNS);
    for beta in betas(temperature, model.kind(), model.t(), n)? {
        let r = mutual_information_with(
            &model,
            beta,
            n,
            la,
            tol.unwrap_or(DEFAULT_MU_TOL),
            source(thermo_limit),
        )?;
        out.push(report_row(beta, model.sites(), Some(la), &Ok(r)));
    }
    Ok(out)
}

fn sweep(spec: &SweepSpec, workers: usize, prior: Option<&str>) -> Result<Table> {
    let mut kept: Vec<(f64, usize, Vec<Cell>)> = Vec::new();
    let mut done = BTreeSet::new();
    if let Some(text) = prior.filter(|t| !t.trim().is_empty()) {
        let records = read_records(text)?;
        if records.columns != REPORT_COLUMNS {
            return Err(Error::Input(
                "cannot resume: existing output has different columns".into(),
            ));
        }
        for row in records.rows {
            let beta: f64 = row[0]
                .parse()
                .map_err(|_| Error::Input(format!("bad beta `{}` in existing output", row[0])))?;
            let l: usize = row[2]
                .parse()
                .map_err(|_| Error::Input(format!("bad L `{}` in existing output", row[2])))?;
            done.insert((fmt_float(beta), l));
            kept.push((beta, l, row.into_iter().map(Cell::Raw).collect()));
        }
    }
    let completed = spec
        .points()
        .into_iter()
        .filter(|(b, l)| done.contains(&(fmt_float(*b), *l)))
        .collect();
    let rows: Vec<SweepRow> = run_sweep(spec, &SweepOptions { workers, completed })?;
    kept.extend(
        rows.iter()
            .map(|r| (r.beta, r.l, report_row(r.beta, r.l, r.la, &r.result))),
    );
    kept.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = Table::new(REPORT_COLUMNS);
    for (_, _, row) in kept {
        out.push(row);
    }
    Ok(out)
}

fn fit(text: &str, beta: Option<f64>, window: Option<(f64, f64)>) -> Result<Table> {
    let records = read_records(text)?;
    let col = |name: &str| {
        records
            .column(name)
            .ok_or_else(|| Error::Input(format!("input has no `{name}` column")))
    };
    let (la_col, em_col) = (col("la")?, col("e_m")?);
    let beta_col = records.column("beta");
    let status_col = records.column("status");
    let wanted = beta.map(fmt_float);

    // points grouped by the rendered beta, in order of first appearance
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &records.rows {
        if status_col.is_some_and(|c| row[c] != "ok") {
            continue;
        }
        let key = match beta_col {
            Some(c) => {
                let b: f64 = row[c]
                    .parse()
                    .map_err(|_| Error::Input(format!("bad beta `{}`", row[c])))?;
                fmt_float(b)
            }
            None => String::new(),
        };
        if wanted.as_ref().is_some_and(|w| *w != key) {
            continue;
        }
        let parse = |c: usize| {
            row[c]
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("bad number `{}`", row[c])))
        };
        let point = (parse(la_col)?, parse(em_col)?);
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push(point),
            None => groups.push((key, vec![point])),
        }
    }
    if groups.is_empty() {
        groups.push((wanted.unwrap_or_default(), Vec::new()));
    }
    let mut out = Table::new(&[
        "beta",
        "slope",
        "intercept",
        "r_squared",
        "slope_stderr",
        "points",
        "window_lo",
        "window_hi",
    ]);
    for (key, points) in groups {
        let f = fit_log_scaling(&points, window)?;
        let beta_cell = if key.is_empty() {
            Cell::Empty
        } else {
            Cell::Raw(key)
        };
        out.push(vec![
            beta_cell,
            Cell::Float(f.slope),
            Cell::Float(f.intercept),
            Cell::Float(f.r_squared),
            Cell::Float(f.slope_stderr),
            Cell::Int(f.points as u64),
            Cell::Float(f.window.0),
            Cell::Float(f.window.1),
        ]);
    }
    Ok(out)
}

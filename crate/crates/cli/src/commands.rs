use std::io::Write;
use std::path::Path;

use avplan_core::bayes::{fit_posterior, load_draws, save_draws, zero_intensity_events};
use avplan_core::data::{parse_events, write_events_csv, write_mileage_csv, MileageProfile};
use avplan_core::model::WeibullGrowthParams;
use avplan_core::planner::{
    classify, enumerate_plans, evaluate_grid, filter_constraints, pareto_front, select_plan,
    write_results_csv, PlanRow, RESULTS_HEADER,
};
use avplan_core::risk::{ModelKind, RiskProfile, Scenario};
use avplan_core::simulate::simulate_nhpp;
use serde::Serialize;

use crate::config::RunConfig;
use crate::svg::{render_front, FrontPoint};
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e| CliError::Io {
        context: format!("writing {}", path.display()),
        source: e,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

macro_rules! say {
    ($log:expr, $($arg:tt)*) => {
        let _ = writeln!($log, $($arg)*);
    };
}

#[derive(Serialize)]
struct SimulationRecord {
    theta: WeibullGrowthParams,
    units: usize,
    daily_miles: f64,
    horizon_days: f64,
    study_start: String,
    seed: u64,
    total_events: usize,
}

pub fn simulate(cfg: &RunConfig, log: &mut dyn Write) -> Result<(), CliError> {
    let sim = cfg.simulation;
    let horizon = cfg.windows.tau_h;
    let template = MileageProfile::constant("SIM", sim.daily_miles, horizon.ceil() as usize)?;
    let data = simulate_nhpp(&sim.theta, &template, sim.units, horizon, cfg.seed)?;

    let events_path = cfg.events_path();
    let mileage_path = cfg.mileage_path();
    write(&events_path, &write_events_csv(&data, cfg.study_start)?)?;
    write(&mileage_path, &write_mileage_csv(&data, cfg.study_start)?)?;
    let record = SimulationRecord {
        theta: sim.theta,
        units: sim.units,
        daily_miles: sim.daily_miles,
        horizon_days: horizon,
        study_start: cfg.study_start.to_string(),
        seed: cfg.seed,
        total_events: data.total_events(),
    };
    write(&cfg.out_dir().join("simulation.json"), &to_json(&record))?;

    say!(
        log,
        "simulated {} units over {} days: {} events",
        sim.units,
        horizon,
        data.total_events()
    );
    say!(
        log,
        "wrote {} and {}",
        events_path.display(),
        mileage_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FitRecord<'a> {
    units: usize,
    events: usize,
    n_post: usize,
    seed: u64,
    acceptance_rates: &'a [f64],
    split_rhat: [f64; 3],
    posterior_median: [f64; 3],
    warnings: &'a [String],
}

pub fn fit(cfg: &RunConfig, log: &mut dyn Write) -> Result<(), CliError> {
    let events = read(&cfg.events_path())?;
    let mileage = read(&cfg.mileage_path())?;
    let data = parse_events(&events, &mileage, cfg.study_start, cfg.windows.tau_h)?;
    let zero = zero_intensity_events(&data);
    if let Some((unit, day)) = zero.first() {
        return Err(avplan_core::Error::Data(format!(
            "{} event(s) fall on zero-mileage days (first: unit {unit}, day {day}); \
             the likelihood is zero for every θ",
            zero.len()
        ))
        .into());
    }

    let fit = fit_posterior(&data, &cfg.prior, cfg.n_post, cfg.seed, &cfg.mcmc)?;
    let draws_path = cfg.draws_path();
    write(&draws_path, &save_draws(&fit.draws))?;
    let median = fit.draws.median();
    let record = FitRecord {
        units: data.units().len(),
        events: data.total_events(),
        n_post: fit.draws.len(),
        seed: cfg.seed,
        acceptance_rates: &fit.acceptance_rates,
        split_rhat: fit.split_rhat,
        posterior_median: median,
        warnings: &fit.warnings,
    };
    write(&cfg.out_dir().join("fit.json"), &to_json(&record))?;

    say!(
        log,
        "fitted {} units, {} events: {} draws",
        data.units().len(),
        data.total_events(),
        fit.draws.len()
    );
    say!(
        log,
        "acceptance {:.3} (per chain {:.3?}); split-Rhat {:.4?}",
        fit.mean_acceptance(),
        fit.acceptance_rates,
        fit.split_rhat
    );
    say!(log, "posterior median theta = {median:?}");
    for w in &fit.warnings {
        say!(log, "warning: {w}");
    }
    say!(log, "wrote {}", draws_path.display());
    Ok(())
}

fn cost_label(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Hpp => "total vehicle-days",
        ModelKind::Nhpp => "test days per vehicle",
    }
}

fn front_points(front: &[RiskProfile]) -> Vec<FrontPoint> {
    front
        .iter()
        .map(|p| FrontPoint {
            c: p.plan.c,
            pr: p.pr,
            ap: p.ap,
            cost: p.cost,
        })
        .collect()
}

#[derive(Serialize)]
struct SelectionRecord {
    rule: String,
    selected: RiskProfile,
}

pub fn plan(cfg: &RunConfig, svg: bool, log: &mut dyn Write) -> Result<(), CliError> {
    let requirement = *cfg.require(&cfg.requirement, "requirement")?;
    let mileage = *cfg.require(&cfg.mileage, "mileage")?;
    let grid = cfg.require(&cfg.grid, "grid")?;
    let constraints = *cfg.require(&cfg.constraints, "constraints")?;
    let draws_path = cfg.draws_path();
    let draws = load_draws(&read(&draws_path)?)?;

    let scenario = Scenario {
        spec: cfg.model_spec(),
        requirement,
        mileage,
    };
    let plans = enumerate_plans(grid)?;
    let profiles = evaluate_grid(&plans, &draws, &scenario)?;
    let rows = classify(&profiles, &constraints);
    let out = cfg.out_dir();
    write(&out.join("results.csv"), &write_results_csv(&rows)?)?;

    let feasible = filter_constraints(&profiles, &constraints);
    let front = pareto_front(&feasible);
    let front_rows: Vec<PlanRow> = front
        .iter()
        .map(|p| PlanRow {
            profile: *p,
            feasible: true,
            on_front: true,
        })
        .collect();
    write(&out.join("front.csv"), &write_results_csv(&front_rows)?)?;
    let model = scenario.kind();
    if svg {
        let title = format!(
            "{} Pareto front, CR <= {}",
            model.as_str().to_uppercase(),
            constraints.alpha_c()
        );
        write(
            &out.join("front.svg"),
            &render_front(&front_points(&front), &title, cost_label(model)),
        )?;
    }

    say!(
        log,
        "{} plans evaluated ({model}), {} with CR <= {}, {} on the Pareto front",
        profiles.len(),
        feasible.len(),
        constraints.alpha_c(),
        front.len()
    );
    let degenerate = profiles.iter().filter(|p| p.degenerate.any()).count();
    if degenerate > 0 {
        say!(
            log,
            "note: {degenerate} plan(s) hit a zero-denominator risk branch (reported as 0)"
        );
    }
    if front.is_empty() {
        return Err(CliError::Infeasible(format!(
            "no plan satisfies CR <= alpha_c = {}{}",
            constraints.alpha_c(),
            constraints
                .alpha_p()
                .map(|a| format!(" and PR <= alpha_p = {a}"))
                .unwrap_or_default()
        )));
    }

    if let Some(rule) = &cfg.priority {
        let selected = select_plan(&front, rule)?;
        write(
            &out.join("selection.json"),
            &to_json(&SelectionRecord {
                rule: rule.describe(),
                selected,
            }),
        )?;
        let p = selected.plan;
        say!(log, "selected ({}):", rule.describe());
        say!(
            log,
            "  n_t={} tau_t={} c={} cost={} CR={:.4} PR={:.4} AP={:.4}",
            p.n_t,
            p.tau_t,
            p.c,
            selected.cost,
            selected.cr,
            selected.pr,
            selected.ap
        );
    }
    say!(log, "wrote {}", out.join("results.csv").display());
    Ok(())
}

struct ResultRow {
    model: String,
    n_t: u32,
    tau_t: f64,
    c: u32,
    tau_total: f64,
    cr: f64,
    pr: f64,
    ap: f64,
    feasible: bool,
    on_front: bool,
}

fn parse_results(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let data_err = |line: usize, m: String| {
        CliError::Core(avplan_core::Error::Parse {
            source_name: "results".into(),
            line: line as u64,
            message: m,
        })
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER.join(",") => {}
        _ => {
            return Err(data_err(
                1,
                format!("expected header `{}`", RESULTS_HEADER.join(",")),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != RESULTS_HEADER.len() {
            return Err(data_err(
                i + 1,
                format!("expected {} fields", RESULTS_HEADER.len()),
            ));
        }
        let bad = |name: &str| data_err(i + 1, format!("invalid {name}"));
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(RESULTS_HEADER[k]));
        let int = |k: usize| f[k].parse::<u32>().map_err(|_| bad(RESULTS_HEADER[k]));
        let flag = |k: usize| f[k].parse::<bool>().map_err(|_| bad(RESULTS_HEADER[k]));
        rows.push(ResultRow {
            model: f[0].to_string(),
            n_t: int(1)?,
            tau_t: num(2)?,
            c: int(3)?,
            tau_total: num(4)?,
            cr: num(5)?,
            pr: num(6)?,
            ap: num(7)?,
            feasible: flag(8)?,
            on_front: flag(9)?,
        });
    }
    Ok(rows)
}

pub fn report(cfg: &RunConfig, svg: bool, log: &mut dyn Write) -> Result<(), CliError> {
    let out = cfg.out_dir();
    let rows = parse_results(&read(&out.join("results.csv"))?)?;
    let model = rows.first().map_or("?", |r| r.model.as_str()).to_string();
    let kind: ModelKind = model.parse()?;
    let cost = |r: &ResultRow| match kind {
        ModelKind::Hpp => r.tau_total,
        ModelKind::Nhpp => r.tau_t,
    };
    let mut front: Vec<&ResultRow> = rows.iter().filter(|r| r.on_front).collect();
    front.sort_by(|a, b| a.c.cmp(&b.c).then(cost(a).total_cmp(&cost(b))));

    say!(
        log,
        "model {model}: {} plans, {} feasible, {} on the front",
        rows.len(),
        rows.iter().filter(|r| r.feasible).count(),
        front.len()
    );
    say!(
        log,
        "{:>4} {:>4} {:>8} {:>10} {:>7} {:>7} {:>7}",
        "c",
        "n_t",
        "tau_t",
        "cost",
        "CR",
        "PR",
        "AP"
    );
    for r in &front {
        say!(
            log,
            "{:>4} {:>4} {:>8} {:>10} {:>7.4} {:>7.4} {:>7.4}",
            r.c,
            r.n_t,
            r.tau_t,
            cost(r),
            r.cr,
            r.pr,
            r.ap
        );
    }
    if svg {
        let pts: Vec<FrontPoint> = front
            .iter()
            .map(|r| FrontPoint {
                c: r.c,
                pr: r.pr,
                ap: r.ap,
                cost: cost(r),
            })
            .collect();
        let title = format!("{} Pareto front", model.to_uppercase());
        write(
            &out.join("front.svg"),
            &render_front(&pts, &title, cost_label(kind)),
        )?;
    }
    Ok(())
}

//! `levy-nfl`: batch front end for the no-free-lunch analyses.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use levy_nfl::arbitrage::{find_immediate_arbitrage, nfl_report_with, Condition, Horizon, Status, Verdict};
use levy_nfl::constraints::null_space;
use levy_nfl::esscher::{check_completeness, find_esmm_with, EsmmOutcome, MeasureGrade};
use levy_nfl::exec::ExecConfig;
use levy_nfl::numeraire::{solve_numeraire_with, NumeraireConfig};
use levy_nfl::optimize::AscentConfig;
use levy_nfl::simulate::{
    esscher_martingale_test, increasing_profit_demo, infinite_horizon_free_lunch_demo, random_portfolios,
    relative_wealth_tests, wealth_path, Policy, SimModel, SimSettings, SimulationReport,
};
use levy_nfl::spec_file::MarketSpecFile;
use levy_nfl::Error;

const THREADS_VAR: &str = "LEVY_NFL_THREADS";
const CSV_PATHS: usize = 200;
const RANDOM_PORTFOLIOS: usize = 20;

#[derive(Parser)]
#[command(name = "levy-nfl", version, about = "No-free-lunch analysis of exponential Lévy markets")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Status of every no-free-lunch condition, with certificates.
    Analyze(Common),
    /// Numéraire portfolio and its growth rate.
    Numeraire(Common),
    /// Supermartingale measure of Esscher form, if one exists.
    Esscher(Common),
    /// Completeness of the unconstrained market.
    Complete(Common),
    /// Monte Carlo checks and demos.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = What::Supermartingale)]
        what: What,
    },
}

#[derive(Args)]
struct Common {
    spec: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Dump sample paths (simulate) or the approximation trace (numeraire).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Optimizer tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Supermartingale,
    IaoDemo,
    InfiniteHorizon,
    EsscherMartingale,
}

/// What a command found.
enum Finding {
    NoFreeLunch,
    FreeLunch,
}

struct Output {
    json: Value,
    text: String,
    finding: Finding,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, run): (&Common, Box<dyn Fn(&Ctx) -> Result<Output, Error>>) = match &cli.cmd {
        Cmd::Analyze(c) => (c, Box::new(analyze)),
        Cmd::Numeraire(c) => (c, Box::new(numeraire)),
        Cmd::Esscher(c) => (c, Box::new(esscher)),
        Cmd::Complete(c) => (c, Box::new(complete)),
        Cmd::Simulate { common, what } => {
            let what = *what;
            (common, Box::new(move |ctx: &Ctx| simulate(ctx, what)))
        }
    };
    let result = Ctx::new(common).and_then(|ctx| run(&ctx));
    match result {
        Ok(out) => {
            if common.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("report serializes"));
            } else {
                print!("{}", out.text);
            }
            match out.finding {
                Finding::NoFreeLunch => ExitCode::SUCCESS,
                Finding::FreeLunch => ExitCode::from(2),
            }
        }
        Err(Error::IaoPresent { xi }) => {
            if common.json {
                println!("{}", json!({ "freeLunch": true, "immediateArbitrage": xi }));
            } else {
                println!("immediate arbitrage opportunity xi = {}", fmt_vec(&xi));
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("levy-nfl: {e}");
            ExitCode::from(1)
        }
    }
}

struct Ctx {
    spec: MarketSpecFile,
    csv: Option<PathBuf>,
    exec: ExecConfig,
}

impl Ctx {
    fn new(c: &Common) -> Result<Ctx, Error> {
        let mut spec = MarketSpecFile::load(&c.spec)?;
        if let Some(s) = c.seed {
            spec.options.seed = s;
        }
        if let Some(n) = c.paths {
            spec.options.paths = n;
        }
        if let Some(t) = c.tol {
            if !(t > 0.0) {
                return Err(Error::Schema("--tol must be positive".into()));
            }
            spec.options.tol = Some(t);
        }
        Ok(Ctx {
            spec,
            csv: c.csv.clone(),
            exec: exec_from_env()?,
        })
    }

    fn ascent(&self) -> AscentConfig {
        let mut a = AscentConfig::default();
        if let Some(t) = self.spec.options.tol {
            a.tol = t;
        }
        if let Some(m) = self.spec.options.max_iterations {
            a.max_iter = m;
        }
        a
    }

    fn settings(&self) -> SimSettings {
        let o = &self.spec.options;
        SimSettings {
            horizon: self.spec.simulation_horizon(),
            n_paths: o.paths,
            seed: o.seed,
            epsilon: o.epsilon,
            n_steps: o.n_steps,
            exec: self.exec,
        }
    }

    fn reject_csv(&self, cmd: &str) -> Result<(), Error> {
        match &self.csv {
            Some(_) => Err(Error::Schema(format!("--csv is not used by {cmd}"))),
            None => Ok(()),
        }
    }
}

fn exec_from_env() -> Result<ExecConfig, Error> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::Schema(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
            Ok(1) => Ok(ExecConfig::sequential()),
            Ok(n) => Ok(ExecConfig::parallel(Some(n))),
        },
        Err(_) => Ok(ExecConfig::default()),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Holds => "holds",
        Status::Fails => "fails",
        Status::NotDecidedHere => "not decided here",
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn analyze(ctx: &Ctx) -> Result<Output, Error> {
    ctx.reject_csv("analyze")?;
    let s = &ctx.spec;
    let r = nfl_report_with(&s.market, &s.constraints, s.horizon, ctx.exec)?;
    let mut text = match r.horizon {
        Horizon::Finite(t) => format!("horizon: finite, T = {t}\n"),
        Horizon::Infinite => "horizon: infinite\n".to_string(),
    };
    for c in Condition::ALL {
        if let Some(st) = r.statuses.get(&c) {
            let name = serde_json::to_value(c).expect("condition name");
            text += &format!("  {:<18} {}\n", name.as_str().unwrap_or("?"), status_word(*st));
        }
    }
    match &r.certificate.verdict {
        Verdict::Found { xi } => text += &format!("immediate arbitrage xi = {}\n", fmt_vec(xi)),
        Verdict::Empty { .. } => text += "no immediate arbitrage in the recession cone\n",
    }
    if let Some(Verdict::Found { xi }) = r.conic_hull_certificate.as_ref().map(|c| &c.verdict) {
        text += &format!("conic hull admits xi = {}, so no supermartingale measure exists\n", fmt_vec(xi));
    }
    for e in &r.evidence {
        text += &format!("  - {e}\n");
    }
    Ok(Output {
        json: to_json(&r),
        text,
        finding: if r.free_lunch() { Finding::FreeLunch } else { Finding::NoFreeLunch },
    })
}

fn numeraire(ctx: &Ctx) -> Result<Output, Error> {
    let s = &ctx.spec;
    let cfg = NumeraireConfig {
        ascent: ctx.ascent(),
        exec: ctx.exec,
        ..NumeraireConfig::default()
    };
    let r = solve_numeraire_with(&s.market, &s.constraints, &cfg, None)?;
    if let Some(path) = &ctx.csv {
        write_trace_csv(path, &r.approx_trace)?;
    }
    let mut text = format!(
        "rho = {}\ngrowth rate = {}\nkkt residual = {:.3e}\n",
        fmt_vec(&r.rho),
        r.growth_rate.to_f64(),
        r.kkt_residual
    );
    for step in &r.approx_trace {
        text += &format!("  n = {:<5} rho = {}\n", step.n, fmt_vec(&step.rho));
    }
    Ok(Output {
        json: to_json(&r),
        text,
        finding: Finding::NoFreeLunch,
    })
}

fn esscher(ctx: &Ctx) -> Result<Output, Error> {
    ctx.reject_csv("esscher")?;
    let s = &ctx.spec;
    let d = s.market.dim;
    let cone = s.constraints.closed_conic_hull(d)?;
    let horizon = match s.horizon {
        Horizon::Finite(t) => Some(t),
        Horizon::Infinite => None,
    };
    let out = find_esmm_with(&s.market, &cone, horizon, &ctx.ascent())?;
    let (text, finding) = match &out {
        EsmmOutcome::Found { params, grade, .. } => {
            let emm = match grade {
                MeasureGrade::Emm => "yes",
                MeasureGrade::StrictEsmm => "no",
            };
            (
                format!(
                    "ESMM yes, EMM {emm}\neta = {}\ng = {:?}\npsi = {}\n",
                    fmt_vec(&params.eta),
                    params.g_tag,
                    params.psi
                ),
                Finding::NoFreeLunch,
            )
        }
        EsmmOutcome::NoEsmm { reason, witness } => (
            format!("ESMM no ({reason:?}), witness {}\n", fmt_vec(witness)),
            // Only a conic constraint set turns the witness into a free lunch.
            if s.constraints.is_cone() {
                Finding::FreeLunch
            } else {
                Finding::NoFreeLunch
            },
        ),
    };
    Ok(Output {
        json: to_json(&out),
        text,
        finding,
    })
}

fn complete(ctx: &Ctx) -> Result<Output, Error> {
    ctx.reject_csv("complete")?;
    let s = &ctx.spec;
    let r = check_completeness(&s.market, &s.constraints)?;
    let text = if r.is_complete() {
        "complete\n".to_string()
    } else {
        format!("incomplete: {}\n", to_json(&r)["reason"].as_str().unwrap_or("?"))
    };
    Ok(Output {
        json: to_json(&r),
        text,
        finding: Finding::NoFreeLunch,
    })
}

fn report_text(r: &SimulationReport) -> String {
    let mut t = format!(
        "{}: {:.6} ± {:.6} (n = {}, {:?})\n",
        r.statistic, r.estimate, r.std_error, r.sample_size, r.verdict
    );
    for c in &r.checkpoints {
        t += &format!("  t = {:<8} {:.6} ± {:.6}\n", c.time, c.estimate, c.std_error);
    }
    for (k, v) in &r.notes {
        t += &format!("  {k} = {v}\n");
    }
    t
}

fn simulate(ctx: &Ctx, what: What) -> Result<Output, Error> {
    let s = &ctx.spec;
    let t = &s.market;
    let settings = ctx.settings();
    match what {
        What::Supermartingale => {
            let rho = solve_numeraire_with(
                t,
                &s.constraints,
                &NumeraireConfig {
                    ascent: ctx.ascent(),
                    exec: ctx.exec,
                    ..NumeraireConfig::default()
                },
                None,
            )?
            .rho;
            let pis = match &s.options.portfolios {
                Some(p) => p.clone(),
                None => {
                    let mut p = vec![vec![0.0; t.dim]];
                    p.extend(random_portfolios(t, &s.constraints, &rho, RANDOM_PORTFOLIOS, settings.seed)?);
                    p
                }
            };
            let reports = relative_wealth_tests(t, &pis, &rho, &settings)?;
            dump_paths(ctx, &settings, Some(&rho))?;
            let violated = reports.iter().filter(|r| !r.consistent()).count();
            let mut text = format!("numeraire rho = {}\n", fmt_vec(&rho));
            for (pi, r) in pis.iter().zip(&reports) {
                text += &format!("pi = {}\n{}", fmt_vec(pi), report_text(r));
            }
            if violated > 0 {
                return Err(Error::Precondition(format!(
                    "{violated} of {} relative wealth tests exceeded 1 by more than 3 standard errors",
                    reports.len()
                )));
            }
            let json = json!({ "rho": rho, "portfolios": pis, "reports": reports });
            Ok(Output {
                json,
                text,
                finding: Finding::NoFreeLunch,
            })
        }
        What::IaoDemo => {
            let cone = s.constraints.recession_cone(t.dim)?;
            let cert = find_immediate_arbitrage(t, &cone, &null_space(t))?;
            let Some(xi) = cert.witness().map(<[f64]>::to_vec) else {
                return Ok(Output {
                    json: json!({ "immediateArbitrage": Value::Null, "certificate": to_json(&cert) }),
                    text: "no immediate arbitrage; nothing to demonstrate\n".into(),
                    finding: Finding::NoFreeLunch,
                });
            };
            let r = increasing_profit_demo(t, &xi, &settings)?;
            dump_paths(ctx, &settings, Some(&xi))?;
            Ok(Output {
                text: format!("xi = {}, every path of W^xi is nondecreasing\n{}", fmt_vec(&xi), report_text(&r)),
                json: json!({ "immediateArbitrage": xi, "report": r }),
                finding: Finding::FreeLunch,
            })
        }
        What::InfiniteHorizon => {
            match infinite_horizon_free_lunch_demo(t, &s.constraints, s.options.level, &settings) {
                Ok(r) => {
                    dump_paths(ctx, &settings, None)?;
                    Ok(Output {
                        text: report_text(&r),
                        json: to_json(&r),
                        finding: Finding::FreeLunch,
                    })
                }
                Err(Error::Precondition(msg)) => Ok(Output {
                    json: json!({ "freeLunch": false, "reason": msg }),
                    text: format!("{msg}\n"),
                    finding: Finding::NoFreeLunch,
                }),
                Err(e) => Err(e),
            }
        }
        What::EsscherMartingale => {
            let cone = s.constraints.closed_conic_hull(t.dim)?;
            let out = find_esmm_with(t, &cone, Some(settings.horizon), &ctx.ascent())?;
            let Some(params) = out.params() else {
                return Err(Error::Precondition("no supermartingale measure to test".into()));
            };
            let r = esscher_martingale_test(t, params, &settings)?;
            dump_paths(ctx, &settings, None)?;
            if !r.consistent() {
                return Err(Error::Precondition(format!(
                    "E[Z_T] = {} is more than 3 standard errors from 1",
                    r.estimate
                )));
            }
            Ok(Output {
                text: format!("eta = {}\n{}", fmt_vec(&params.eta), report_text(&r)),
                json: json!({ "params": params, "report": r }),
                finding: Finding::NoFreeLunch,
            })
        }
    }
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Schema(format!("cannot write {}: {e}", path.display()))
}

/// First paths of `X` (and of `log W^π` when given), one row per grid time.
fn dump_paths(ctx: &Ctx, s: &SimSettings, pi: Option<&[f64]>) -> Result<(), Error> {
    let Some(path) = &ctx.csv else { return Ok(()) };
    let t = &ctx.spec.market;
    let model = SimModel::new(t, s.epsilon)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["path".to_string(), "time".to_string()];
    header.extend((0..t.dim).map(|i| format!("x{i}")));
    if pi.is_some() {
        header.push("log_wealth".into());
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for k in 0..s.n_paths.min(CSV_PATHS) {
        let p = model.path(s.horizon, s.n_steps, s.seed, k as u64, &[]);
        let logw = match pi {
            Some(pi) => Some(wealth_path(&p, &t.c, pi, Policy::ConstantVector)?.log_wealth),
            None => None,
        };
        for (i, (time, x)) in p.times.iter().zip(p.values()).enumerate() {
            let mut row = vec![k.to_string(), time.to_string()];
            row.extend(x.iter().map(f64::to_string));
            if let Some(l) = &logw {
                row.push(l[i].to_string());
            }
            w.write_record(&row).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| csv_err(path, e))
}

fn write_trace_csv(path: &Path, trace: &[levy_nfl::numeraire::ApproxStep]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let d = trace.first().map_or(0, |s| s.rho.len());
    let mut header = vec!["n".to_string()];
    header.extend((0..d).map(|i| format!("rho{i}")));
    header.push("growth_rate".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for s in trace {
        let mut row = vec![s.n.to_string()];
        row.extend(s.rho.iter().map(f64::to_string));
        row.push(serde_json::to_value(s.growth_rate).expect("number").to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

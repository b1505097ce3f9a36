//! `zenoflip`: data emitters, validations and the play server.
//!
//! Strategy and schedule times are in units of `tau`; `validate` alone works
//! in physical time. Exit status is 0 on success, 2 for bad arguments and 1
//! for numerical or I/O failures.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use zenoflip_core::collapse::{iterate_matrices, propagate_schedule};
use zenoflip_core::export::{self, format_number};
use zenoflip_core::game::{self, GameVariant, PayoffReport, RoundLog};
use zenoflip_core::quadrature::QuadratureOptions;
use zenoflip_core::resonance::{build_coupling, integrate_full, validate_two_level_with, ResonanceParams};
use zenoflip_core::{rng, strategy, Error, Game, Schedule, Spectrum, Strategy};
use zenoflip_service::ServiceConfig;

#[derive(Debug, Parser)]
#[command(name = "zenoflip", version, about = "Quantum coin-flip game with measurement-induced collapse")]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-level amplitudes (t, a_j, a_s) around the unit circle.
    Amplitudes {
        #[arg(long, default_value_t = 4.0)]
        t_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
    /// Probability that the coin ends on |s> over the strategy triangle.
    Heatmap {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
    /// Expected payoffs, for random play or a fixed strategy pair.
    Payoff {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Method::Quadrature)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Rule::Adaptive)]
        rule: Rule,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        /// Evaluate the pure strategy (T1, T2) instead of random play.
        #[arg(long, requires = "t2", allow_negative_numbers = true)]
        t1: Option<f64>,
        #[arg(long, requires = "t1", allow_negative_numbers = true)]
        t2: Option<f64>,
    },
    /// Mixing coefficients for m equally spaced measurements over one tau.
    Zeno {
        #[arg(long, default_value_t = 8)]
        m_max: u32,
    },
    /// Mixing coefficients for an explicit measurement schedule.
    Schedule {
        /// Comma-separated measurement times, e.g. `0.25,0.5,1`.
        #[arg(long)]
        times: String,
    },
    /// Full-spectrum simulation against the two-level model.
    Validate {
        /// `linear` or a path to a spectrum JSON file.
        #[arg(long, default_value = "linear")]
        spectrum: String,
        /// Size of the search set for the linear spectrum.
        #[arg(long, default_value_t = 100)]
        num_states: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Also write the sampled trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Plays rounds at a fixed strategy pair, one log record per round.
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, allow_negative_numbers = true)]
        t2: f64,
        #[arg(long, default_value_t = 1)]
        rounds: u64,
    },
    /// Silvia's best reply to a given T1.
    BestResponse {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 1001)]
        resolution: usize,
    },
    /// Juan's maximin measurement time.
    Maximin {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1001)]
        resolution: usize,
    },
    /// HTTP play service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Append each finished round to `<dir>/<session>.jsonl`.
        #[arg(long)]
        journal_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GameArgs {
    /// 1: measurements at T1 and T2; 2: a third at tau.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    game: u8,
    #[arg(long, default_value_t = 1.0)]
    stake: f64,
}

impl GameArgs {
    fn spec(&self) -> Result<Game, Error> {
        let variant = if self.game == 1 { GameVariant::TwoMeasure } else { GameVariant::ThreeMeasure };
        Game::new(variant, self.stake)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Adaptive,
    Fixed,
}

fn bad_argument(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("ZENOFLIP_THREADS") else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(bad_argument(format!("ZENOFLIP_THREADS must be a positive integer, got {raw:?}"))),
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring worker threads")
}

fn csv_line(values: &[f64]) -> String {
    values.iter().map(|&v| format_number(v)).collect::<Vec<_>>().join(",") + "\n"
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"
}

fn payoff_csv(p: &PayoffReport<f64>) -> String {
    let method = serde_json::to_value(p.method).expect("enum serializes");
    format!(
        "pi_s,pi_j,payoff_s,payoff_j,method,error_estimate\n{},{},{},{},{},{}\n",
        format_number(p.pi_s),
        format_number(p.pi_j),
        format_number(p.payoff_s),
        format_number(p.payoff_j),
        method.as_str().unwrap_or_default(),
        format_number(p.error_estimate)
    )
}

fn history_symbols(log: &RoundLog<f64>) -> String {
    log.history.iter().map(|o| o.symbol()).collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let render = |default: Format, csv: &dyn Fn() -> anyhow::Result<String>, json: &dyn Fn() -> anyhow::Result<Value>| {
        match cli.format.unwrap_or(default) {
            Format::Csv => csv(),
            Format::Json => json().map(|v| pretty(&v)),
        }
    };
    let text = match &cli.command {
        Command::Amplitudes { t_max, points } => {
            if !(*t_max > 0.0 && t_max.is_finite()) {
                return Err(bad_argument(format!("t-max must be positive, got {t_max}")));
            }
            if *points < 2 {
                return Err(bad_argument("points must be at least 2"));
            }
            render(
                Format::Csv,
                &|| Ok(export::amplitudes_csv(*t_max, *points)),
                &|| {
                    let rows = export::amplitude_rows(*t_max, *points);
                    Ok(Value::Array(rows.iter().map(|[t, a_j, a_s]| json!({"t": t, "a_j": a_j, "a_s": a_s})).collect()))
                },
            )?
        }
        Command::Heatmap { game, resolution } => {
            let grid = strategy::heatmap(&game.spec()?, *resolution)?;
            render(Format::Csv, &|| Ok(export::heatmap_csv(&grid)), &|| Ok(export::heatmap_json(&grid)))?
        }
        Command::Payoff { game, method, rule, tol, trials, t1, t2 } => {
            let spec = game.spec()?;
            let (report, full) = match (t1, t2) {
                (Some(t1), Some(t2)) => {
                    let report = game::expected_payoffs(&spec, &Strategy::new(*t1, *t2)?);
                    (report.clone(), serde_json::to_value(report)?)
                }
                _ => {
                    let result = match method {
                        Method::Quadrature => {
                            let options = match rule {
                                Rule::Adaptive => QuadratureOptions::adaptive(*tol),
                                Rule::Fixed => QuadratureOptions::fixed(*tol),
                            };
                            strategy::random_strategy_payoff(&spec, &options)?
                        }
                        Method::Mc => strategy::monte_carlo_payoff(&spec, *trials, cli.seed)?,
                    };
                    if let Some(check) = result.reference.as_ref().filter(|c| !c.consistent) {
                        eprintln!("warning: {}", check.note);
                    }
                    (result.payoff.clone(), serde_json::to_value(&result)?)
                }
            };
            render(Format::Json, &|| Ok(payoff_csv(&report)), &|| Ok(full.clone()))?
        }
        Command::Zeno { m_max } => {
            if *m_max == 0 {
                return Err(bad_argument("m-max must be at least 1"));
            }
            render(Format::Csv, &|| Ok(export::zeno_csv::<f64>(*m_max)?), &|| Ok(export::zeno_json::<f64>(*m_max)?))?
        }
        Command::Schedule { times } => {
            let schedule = Schedule::parse(times)?;
            let unit = ResonanceParams::unit();
            let mixing = propagate_schedule(&schedule, &unit);
            let iterated = iterate_matrices(&schedule, &unit);
            render(
                Format::Csv,
                &|| Ok(format!("alpha,beta,beta_iterated\n{}", csv_line(&[mixing.alpha, mixing.beta, iterated.p_s]))),
                &|| Ok(json!({"times": schedule.times(), "alpha": mixing.alpha, "beta": mixing.beta, "beta_iterated": iterated.p_s})),
            )?
        }
        Command::Validate { spectrum, num_states, dt, trajectory } => {
            let spectrum = if spectrum == "linear" {
                Spectrum::linear(*num_states)?
            } else {
                let text = std::fs::read_to_string(spectrum).with_context(|| format!("reading {spectrum}"))?;
                Spectrum::from_json(&text)?
            };
            let coupling = build_coupling(&spectrum)?;
            let report = validate_two_level_with(&spectrum, &coupling, *dt)?;
            if let Some(path) = trajectory {
                let path_data = integrate_full(&spectrum, &coupling, report.tau, *dt)?;
                std::fs::write(path, export::trajectory_csv(&path_data))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            render(
                Format::Json,
                &|| {
                    Ok(format!(
                        "sup_deviation,p_s_final,max_norm_drift,omega,tau,gap_ratio,step,steps\n{}",
                        csv_line(&[
                            report.sup_deviation,
                            report.p_s_final,
                            report.max_norm_drift,
                            report.omega,
                            report.tau,
                            report.gap_ratio.unwrap_or(f64::NAN),
                            report.step,
                            report.steps as f64,
                        ])
                    ))
                },
                &|| Ok(serde_json::to_value(report)?),
            )?
        }
        Command::Simulate { game, t1, t2, rounds } => {
            let spec = game.spec()?;
            let strategy = Strategy::new(*t1, *t2)?;
            let logs: Vec<RoundLog<f64>> = (0..*rounds)
                .map(|k| game::play_round_with(&spec, &strategy, &mut rng::stream(cli.seed, k)).log_record())
                .collect();
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => {
                    logs.iter().map(|l| serde_json::to_string(l).map(|s| s + "\n")).collect::<Result<String, _>>()?
                }
                Format::Csv => {
                    let mut out = String::from("round,t1,t2,history,final,payoff_s\n");
                    for (k, log) in logs.iter().enumerate() {
                        out += &format!(
                            "{k},{},{},{},{},{}\n",
                            format_number(log.t1),
                            format_number(log.t2),
                            history_symbols(log),
                            log.final_outcome.symbol(),
                            format_number(log.payoff_s)
                        );
                    }
                    out
                }
            }
        }
        Command::BestResponse { game, t1, resolution } => {
            let reply = strategy::best_response(&game.spec()?, *t1, *resolution)?;
            render(
                Format::Json,
                &|| Ok(format!("t1,t2_star,value\n{}", csv_line(&[*t1, reply.t2_star, reply.value]))),
                &|| Ok(json!({"t1": t1, "t2_star": reply.t2_star, "value": reply.value})),
            )?
        }
        Command::Maximin { game, resolution } => {
            let m = strategy::maximin_strategy(&game.spec()?, *resolution)?;
            render(
                Format::Json,
                &|| {
                    let t1 = m.t1_star.map(format_number).unwrap_or_default();
                    Ok(format!("t1_star,game_value,flat\n{t1},{},{}\n", format_number(m.game_value), m.flat))
                },
                &|| Ok(serde_json::to_value(m)?),
            )?
        }
        Command::Serve { port, host, static_dir, journal_dir } => {
            let ip = host.parse().map_err(|_| bad_argument(format!("host must be an IP address, got {host}")))?;
            if let Some(dir) = static_dir.as_ref().filter(|d| !d.is_dir()) {
                return Err(bad_argument(format!("static dir {} does not exist", dir.display())));
            }
            if let Some(dir) = journal_dir {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let addr = SocketAddr::new(ip, *port);
            let config = ServiceConfig { static_dir: static_dir.clone(), journal_dir: journal_dir.clone() };
            eprintln!("listening on http://{addr}");
            tokio::runtime::Runtime::new()?.block_on(zenoflip_service::serve(addr, config))?;
            return Ok(());
        }
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

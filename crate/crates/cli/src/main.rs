use clap::{Args, Parser, Subcommand, ValueEnum};
use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use halfplane::enumeration::{phi_closed, phi_recurrence, quad_count, theta_of_q, z_closed, z_series};
use halfplane::harness::*;
use halfplane::law::{p_i, p_ik, tail_mass, PeelLaw};
use halfplane::map::document::{render_svg, MapDocument, MapMode};
use halfplane::map::eventlog::from_event_log;
use halfplane::map::{EventLog, FiniteMap, HalfPlaneMap};
use halfplane::sampler::{
    boltzmann_polygon, build_ball, core, core_finite, expand_finite, expand_nonsimple, peel_steps, uniform_polygon,
    BallConfig, NonSimpleParams, Schedule, ScheduleKind,
};

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "halfplane", version, about = "Half-planar triangulations: counts, peeling law, samplers, experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact counts.
    #[command(subcommand)]
    Enum(EnumCmd),
    /// The one-step peeling law.
    #[command(subcommand)]
    Law(LawCmd),
    /// Draw maps.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Run a verification suite; exits 0 iff it passes.
    Verify(VerifyArgs),
    /// Run an experiment; exits 0 iff it passes.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Convert a map document or report to json, csv or svg.
    Export(ExportArgs),
}

#[derive(Subcommand)]
enum EnumCmd {
    /// Triangulations of an m-gon with n inner vertices.
    Phi {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        /// Use the recurrence instead of the closed form.
        #[arg(long)]
        recurrence: bool,
    },
    /// Partition function of the m-gon at weight q.
    Z {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        q: f64,
        /// Also print the truncated series up to this many inner vertices.
        #[arg(long)]
        cutoff: Option<u64>,
    },
    /// Quadrangulations of a 2m-gon with n inner vertices.
    Quad {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand)]
enum LawCmd {
    /// Parameters and event masses for distances up to --imax.
    Table {
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 10)]
        imax: u64,
    },
    /// Identity and mass checks for one alpha.
    Check {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SampleCmd {
    /// Hull of the ball of radius r around the root.
    Ball {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "leftmost_near_root")]
        schedule: ScheduleKind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// A fixed number of peeling steps, stored with its event log.
    Peel {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        steps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "leftmost_near_root")]
        schedule: ScheduleKind,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Uniform (--n) or Boltzmann (--boltzmann) triangulation of an m-gon.
    Polygon {
        #[arg(long)]
        m: u64,
        #[arg(long, conflicts_with = "boltzmann", required_unless_present = "boltzmann")]
        n: Option<u64>,
        #[arg(long)]
        boltzmann: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Replace edges by bundles of parallel edges with loops.
    Expand {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        q_geo: f64,
        /// Alpha of the law the map came from; forces symmetric loops when positive.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Undo an expansion.
    Core {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a map from an event log.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Enum,
    Law,
    Order,
    Quad,
    Sampler,
    Ball,
    Nonsimple,
}

#[derive(Args)]
struct VerifyArgs {
    suite: Suite,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trials for the stochastic suites.
    #[arg(long)]
    trials: Option<u64>,
    /// Alpha for the order suite.
    #[arg(long, default_value = "2/3")]
    alpha: String,
    /// Use the look-ahead selector in the order suite, which must fail.
    #[arg(long)]
    peeking: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Root-face statistics of uniform m-gons with n inner vertices.
    FiniteLimit {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    format: Option<ExportFormat>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn law_of(a: &str) -> Res<PeelLaw> {
    Ok(a.parse()?)
}

fn write_doc(doc: &MapDocument, out: Option<&Path>, svg: Option<(&Path, String)>) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, doc.to_json())?,
        None => println!("{}", doc.to_json()),
    }
    if let Some((p, text)) = svg {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn finish(rep: &StatReport, out: Option<&Path>, csv: Option<&Path>) -> Res<bool> {
    print!("{rep}");
    if let Some(p) = out {
        rep.write(p, ExportFormat::Json)?;
    }
    if let Some(p) = csv {
        rep.write(p, ExportFormat::Csv)?;
    }
    Ok(rep.pass)
}

fn read_doc(path: &Path) -> Res<MapDocument> {
    Ok(MapDocument::from_json(&std::fs::read_to_string(path)?)?)
}

fn is_halfplane(doc: &MapDocument) -> bool {
    doc.window.is_some()
}

fn run(cli: Cli) -> Res<bool> {
    match cli.cmd {
        Cmd::Enum(c) => enumerate(c).map(|_| true),
        Cmd::Law(c) => law(c),
        Cmd::Sample(c) => sample(c).map(|_| true),
        Cmd::Verify(v) => verify(v),
        Cmd::Experiment(ExperimentCmd::FiniteLimit { m, n, trials, seed, out, csv }) => {
            let rep = finite_limit_experiment(&FiniteLimitConfig::new(m, n, trials, seed))?;
            finish(&rep, out.as_deref(), csv.as_deref())
        }
        Cmd::Export(e) => export(e).map(|_| true),
    }
}

fn enumerate(c: EnumCmd) -> Res<()> {
    match c {
        EnumCmd::Phi { n, m, recurrence } => {
            let v = if recurrence { phi_recurrence(n, m)? } else { phi_closed(n, m)? };
            println!("{}", v.value());
        }
        EnumCmd::Z { m, q, cutoff } => {
            let theta = theta_of_q(q)?;
            println!("theta {}", theta.value());
            println!("z {}", z_closed(m, &theta)?.to_f64());
            if let Some(c) = cutoff {
                let b = z_series(m, q, c)?;
                println!("series {} tail_bound {:e}", b.lower, b.tail_bound);
            }
        }
        EnumCmd::Quad { m, n } => println!("{}", quad_count(m, n)?.value()),
    }
    Ok(())
}

fn law(c: LawCmd) -> Res<bool> {
    match c {
        LawCmd::Table { alpha, imax } => {
            let l = law_of(&alpha)?;
            println!("alpha {} beta {} theta {} q {} phase {:?}", l.alpha(), l.beta(), l.theta(), l.q(), l.phase());
            println!("i,p_i,p_i0_one_side,tail_after_i");
            for i in 1..=imax {
                println!("{i},{},{},{}", p_i(&l, i), p_ik(&l, i, 0), tail_mass(&l, i));
            }
            Ok(true)
        }
        LawCmd::Check { alpha, out } => {
            law_of(&alpha)?;
            let bounds = LawBounds { alphas: vec![alpha.clone()], masses: Vec::new(), tails: Vec::new(), ..Default::default() };
            let mut rep = verify_law(&bounds);
            rep.push(Check::within(
                "total_mass_cap_10000",
                halfplane::law::total_mass_partial(&law_of(&alpha)?, 10_000),
                1.0,
                0.01,
            ));
            finish(&rep, out.as_deref(), None)
        }
    }
}

fn sample(c: SampleCmd) -> Res<()> {
    match c {
        SampleCmd::Ball { alpha, r, seed, schedule, out, svg } => {
            let cfg = BallConfig { schedule: Schedule::new(schedule, seed), ..Default::default() };
            let ball = build_ball(&law_of(&alpha)?, r, seed, &cfg)?;
            if let Some(a) = &ball.anomaly {
                eprintln!("warning: build stopped early ({:?}): {}", a.kind, a.message);
            }
            eprintln!("steps {} vertices {}", ball.steps, ball.map.store().vertex_count());
            let doc = MapDocument::from_halfplane(&ball.map, None);
            let pic = svg.as_deref().map(|p| (p, render_svg(ball.map.store(), ball.map.root())));
            write_doc(&doc, out.as_deref(), pic)
        }
        SampleCmd::Peel { alpha, steps, seed, schedule, out, svg } => {
            let (map, log) = peel_steps(&law_of(&alpha)?, steps, seed, Schedule::new(schedule, seed))?;
            let doc = MapDocument::from_halfplane(&map, Some(log));
            let pic = svg.as_deref().map(|p| (p, render_svg(map.store(), map.root())));
            write_doc(&doc, out.as_deref(), pic)
        }
        SampleCmd::Polygon { m, n, boltzmann, seed, out, svg } => {
            let fm = match (n, boltzmann) {
                (Some(n), _) => uniform_polygon(m, n, seed)?,
                (None, Some(q)) => boltzmann_polygon(m, q, seed)?,
                (None, None) => return Err("give --n or --boltzmann".into()),
            };
            eprintln!("code {}", fm.code()?);
            let pic = svg.as_deref().map(|p| (p, render_svg(fm.store(), fm.root())));
            write_doc(&MapDocument::from_finite(&fm), out.as_deref(), pic)
        }
        SampleCmd::Expand { input, q_geo, alpha, seed, out } => {
            let doc = read_doc(&input)?;
            let params = NonSimpleParams::new(q_geo, alpha);
            let (next, stats) = if is_halfplane(&doc) {
                let (m, st) = expand_nonsimple(&doc.to_halfplane()?, &params, seed)?;
                (MapDocument::from_halfplane(&m, None), st)
            } else {
                let (m, st) = expand_finite(&doc.to_finite()?, &params, seed)?;
                (MapDocument::from_finite(&m), st)
            };
            eprintln!("edges {} loops {}", stats.edges(), stats.loops);
            write_doc(&next, out.as_deref(), None)
        }
        SampleCmd::Core { input, out } => {
            let doc = read_doc(&input)?;
            let next = if is_halfplane(&doc) {
                MapDocument::from_halfplane(&core(&doc.to_halfplane()?)?, None)
            } else {
                MapDocument::from_finite(&core_finite(&doc.to_finite()?)?)
            };
            write_doc(&next, out.as_deref(), None)
        }
        SampleCmd::Replay { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let log: EventLog = match MapDocument::from_json(&text) {
                Ok(doc) => doc.event_log.ok_or("document has no event log")?,
                Err(_) => serde_json::from_str(&text)?,
            };
            let map: HalfPlaneMap = from_event_log(&log)?;
            write_doc(&MapDocument::from_halfplane(&map, Some(log)), out.as_deref(), None)
        }
    }
}

fn verify(v: VerifyArgs) -> Res<bool> {
    let rep = match v.suite {
        Suite::Enum => verify_enumeration(&EnumBounds::default()),
        Suite::Law => verify_law(&LawBounds::default()),
        Suite::Quad => quad_constants_report(&[0.0, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, f64::INFINITY]),
        Suite::Order => {
            let cfg = OrderConfig::new(v.trials.unwrap_or(100_000), v.seed);
            let law = law_of(&v.alpha)?;
            let first = SelectorChoice::Schedule(ScheduleKind::LeftmostNearRoot);
            let second = if v.peeking {
                SelectorChoice::Peeking
            } else {
                SelectorChoice::Schedule(ScheduleKind::UniformRandomExposed)
            };
            order_invariance_with(&law, &cfg, first, second)?
        }
        Suite::Sampler => {
            let d = SamplerBounds::default();
            sampler_report(&SamplerBounds { trials: v.trials.unwrap_or(d.trials), seed: v.seed, ..d })?
        }
        Suite::Ball => {
            let d = BallBounds::default();
            ball_report(&BallBounds { builds: v.trials.unwrap_or(d.builds), seed: v.seed, ..d })?
        }
        Suite::Nonsimple => {
            let d = NonSimpleBounds::default();
            nonsimple_report(&NonSimpleBounds { trials: v.trials.unwrap_or(d.trials), seed: v.seed, ..d })?
        }
    };
    finish(&rep, v.out.as_deref(), v.csv.as_deref())
}

fn export(e: ExportArgs) -> Res<()> {
    let format = e.format.or_else(|| ExportFormat::from_path(&e.out)).ok_or("cannot tell the output format")?;
    let text = std::fs::read_to_string(&e.input)?;
    if let Ok(doc) = MapDocument::from_json(&text) {
        let out = match format {
            ExportFormat::Json => doc.to_json(),
            ExportFormat::Svg => match doc.mode {
                MapMode::Finite => {
                    let fm: FiniteMap = doc.to_finite()?;
                    render_svg(fm.store(), fm.root())
                }
                _ if is_halfplane(&doc) => {
                    let m = doc.to_halfplane()?;
                    render_svg(m.store(), m.root())
                }
                _ => {
                    let fm = doc.to_finite()?;
                    render_svg(fm.store(), fm.root())
                }
            },
            ExportFormat::Csv => return Err("maps have no csv form".into()),
        };
        std::fs::write(&e.out, out)?;
        return Ok(());
    }
    let rep = match StatReport::from_json(&text) {
        Ok(r) => r,
        Err(_) => StatReport::from_csv(&text)?,
    };
    rep.write(&e.out, format)?;
    Ok(())
}

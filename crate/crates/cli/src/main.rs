mod config;
mod report;

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use dvchain_core::dvmatrix::{self, direct_concat, matrix_min, to_csv, to_pgm, PGM_DEFAULT_CAP};
use dvchain_core::ephemeris::{parse_catalog, AngleUnit, Catalog};
use dvchain_core::graphsearch::{
    build_sequence_dfa, build_time_expanded_graph, k_shortest_unique, shortest_path_product, DfaVariant, GraphError,
};
use dvchain_core::sequence::{budget_max_objects, dfs_best_sequences};
use dvchain_core::{Adjustments, DvMatrix, LambertConfig, MatrixSet, SequenceResult};

use config::{Angles, RunConfig, Settings, Solver};

#[derive(Parser)]
#[command(name = "dvchain", version, about = "Multi-rendezvous sequence planning on ΔV matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a catalog and list its objects.
    Catalog(CatalogArgs),
    /// Rendezvous ΔV matrix of one pair: JSON document, CSV and PGM.
    Porkchop(PorkchopArgs),
    /// Stay and wait transforms on a matrix document.
    Adjust(AdjustArgs),
    /// Direct concatenation over a chain of matrix documents.
    Concat(ConcatArgs),
    /// Best sequences of N objects.
    Search(SearchArgs),
    /// Longest sequences within a ΔV budget.
    Budget(SearchArgs),
    /// Time-expanded graph as a text edge list.
    ExportGraph(ExportArgs),
}

#[derive(Args)]
struct CatalogArgs {
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct PorkchopArgs {
    #[command(flatten)]
    settings: Settings,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    /// ΔV (m/s) rendered white in the PGM image.
    #[arg(long, default_value_t = PGM_DEFAULT_CAP)]
    pgm_cap: f64,
}

#[derive(Args)]
struct AdjustArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Stay time in grid steps.
    #[arg(long, default_value_t = 0)]
    stay: usize,
    /// Pad the grid before the stay shift.
    #[arg(long)]
    augment: bool,
    /// Apply the wait adjustment last.
    #[arg(long)]
    wait: bool,
}

#[derive(Args)]
struct ConcatArgs {
    /// Matrix documents, in chain order.
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    settings: Settings,
    /// Edge-list file (default: <out>/graph.txt).
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn data<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Data(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Catalog(a) => cmd_catalog(resolve(a.settings)?),
        Command::Porkchop(a) => cmd_porkchop(resolve(a.settings)?, &a.from, &a.to, a.pgm_cap),
        Command::Adjust(a) => cmd_adjust(&a),
        Command::Concat(a) => cmd_concat(&a),
        Command::Search(a) => cmd_search(resolve(a.settings)?),
        Command::Budget(a) => cmd_budget(resolve(a.settings)?),
        Command::ExportGraph(a) => {
            let cfg = resolve(a.settings)?;
            let output = a.output.unwrap_or_else(|| cfg.out.join("graph.txt"));
            cmd_export_graph(cfg, &output)
        }
    }
}

fn resolve(flags: Settings) -> Outcome<RunConfig> {
    let file = match &flags.config {
        Some(path) => config::read_file(path).map_err(Failure::Usage)?,
        None => Settings::default(),
    };
    let cfg = RunConfig::resolve(flags, file);
    if cfg.threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    cfg.grid().map_err(Failure::Usage)?;
    Ok(cfg)
}

fn pool(cfg: &RunConfig) -> Outcome<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(data)
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn echo_config(cfg: &RunConfig) -> Outcome {
    write(&cfg.out.join("effective_config.toml"), cfg.to_toml())
}

fn load_catalog(cfg: &RunConfig) -> Outcome<Catalog> {
    let Some(path) = &cfg.catalog else {
        return usage("--catalog is required");
    };
    let file = fs::File::open(path).with_context(|| format!("cannot open catalog {}", path.display()))?;
    let unit = match cfg.angles {
        Angles::Deg => AngleUnit::Degrees,
        Angles::Rad => AngleUnit::Radians,
    };
    parse_catalog(BufReader::new(file), unit)
        .with_context(|| format!("catalog {}", path.display()))
        .map_err(Failure::Data)
}

fn read_matrix(path: &Path) -> Outcome<DvMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    dvmatrix::deserialize(&text)
        .with_context(|| format!("matrix document {}", path.display()))
        .map_err(Failure::Data)
}

fn write_matrix(path: &Path, m: &DvMatrix) -> Outcome {
    write(path, dvmatrix::serialize(m))
}

enum Source {
    Catalog(Catalog),
    Matrices(MatrixSet),
}

// Opens the catalog or matrix directory and fixes the object list.
fn open_source(cfg: &RunConfig) -> Outcome<(Source, Vec<String>)> {
    let source = match (&cfg.catalog, &cfg.matrices) {
        (Some(_), Some(_)) => return usage("use either --catalog or --matrices, not both"),
        (None, None) => return usage("--catalog or --matrices is required"),
        (Some(_), None) => Source::Catalog(load_catalog(cfg)?),
        (None, Some(dir)) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("cannot list {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            paths.sort();
            let mats = paths.iter().map(|p| read_matrix(p)).collect::<Outcome<Vec<_>>>()?;
            if mats.is_empty() {
                return Err(data(anyhow!("no matrix documents in {}", dir.display())));
            }
            Source::Matrices(MatrixSet::from_matrices(mats).map_err(data)?)
        }
    };
    let known: Vec<String> = match &source {
        Source::Catalog(c) => c.ids().map(str::to_string).collect(),
        Source::Matrices(s) => s.ids().to_vec(),
    };
    let ids = if cfg.objects.is_empty() {
        known
    } else {
        if let Some(bad) = cfg.objects.iter().find(|id| !known.contains(id)) {
            return Err(data(anyhow!("unknown object `{bad}`")));
        }
        cfg.objects.clone()
    };
    Ok((source, ids))
}

fn materialize(cfg: &RunConfig, source: Source, ids: &[String]) -> Outcome<MatrixSet> {
    match source {
        Source::Catalog(catalog) => {
            let adjust = Adjustments {
                stay_steps: cfg.stay,
                augment: cfg.augment,
                wait: true,
            };
            let lambert = LambertConfig {
                max_revolutions: cfg.max_revs,
            };
            let grid = cfg.grid().map_err(Failure::Usage)?;
            MatrixSet::generate(&catalog, ids, &grid, &lambert, &adjust).map_err(data)
        }
        Source::Matrices(set) => set.subset(ids).map_err(data),
    }
}

fn cmd_catalog(cfg: RunConfig) -> Outcome {
    let catalog = load_catalog(&cfg)?;
    let mut out = format!("{} objects, mu = {} AU^3/day^2\n", catalog.len(), catalog.mu);
    out.push_str("id           a[AU]          e      i[deg]   raan[deg]   argp[deg]     M0[deg]   epoch[MJD2000]\n");
    for el in &catalog.objects {
        if !cfg.objects.is_empty() && !cfg.objects.contains(&el.id) {
            continue;
        }
        out.push_str(&format!(
            "{:<8} {:>10.6} {:>10.6} {:>11.5} {:>11.5} {:>11.5} {:>11.5} {:>16.3}\n",
            el.id,
            el.a,
            el.e,
            el.i.to_degrees(),
            el.raan.to_degrees(),
            el.argp.to_degrees(),
            el.mean_anomaly.to_degrees(),
            el.epoch
        ));
    }
    print!("{out}");
    Ok(())
}

fn cmd_porkchop(cfg: RunConfig, from: &str, to: &str, cap: f64) -> Outcome {
    let catalog = load_catalog(&cfg)?;
    let grid = cfg.grid().map_err(Failure::Usage)?;
    let lambert = LambertConfig {
        max_revolutions: cfg.max_revs,
    };
    let m = pool(&cfg)?
        .install(|| dvmatrix::build_porkchop(&catalog, from, to, &grid, &lambert))
        .map_err(data)?;
    let stem = cfg.out.join(format!("{from}-{to}"));
    write_matrix(&stem.with_extension("json"), &m)?;
    write(&stem.with_extension("csv"), to_csv(&m))?;
    write(&stem.with_extension("pgm"), to_pgm(&m, cap))?;
    echo_config(&cfg)?;
    let (v, i, j) = matrix_min(&m);
    println!(
        "{from}->{to}: {}x{} grid, minimum {v:.1} m/s departing {} after {} days",
        m.d(),
        m.h(),
        grid.departure(j),
        grid.duration(i)
    );
    Ok(())
}

fn cmd_adjust(a: &AdjustArgs) -> Outcome {
    let m = read_matrix(&a.input)?;
    let adjust = Adjustments {
        stay_steps: a.stay,
        augment: a.augment,
        wait: a.wait,
    };
    let out = adjust.apply(&m).map_err(data)?;
    write_matrix(&a.output, &out)?;
    println!("{}: {}x{} grid, minimum {:.1} m/s", a.output.display(), out.d(), out.h(), matrix_min(&out).0);
    Ok(())
}

fn cmd_concat(a: &ConcatArgs) -> Outcome {
    let mut acc = read_matrix(&a.inputs[0])?;
    for path in &a.inputs[1..] {
        let next = read_matrix(path)?;
        acc = direct_concat(&acc, &next)
            .with_context(|| format!("concatenating {}", path.display()))
            .map_err(Failure::Data)?;
    }
    write_matrix(&a.output, &acc)?;
    println!("{}: minimum {:.1} m/s", acc.labels().join("-"), matrix_min(&acc).0);
    Ok(())
}

fn header(cfg: &RunConfig, set: &MatrixSet) -> Vec<String> {
    let g = set.spec();
    vec![
        format!("objects: {} ({})", set.len(), set.ids().join(" ")),
        format!(
            "grid: dt {} days, {} departures from {}, {} durations up to {} days",
            g.dt_step,
            g.h,
            g.t_start,
            g.d,
            g.duration(g.d)
        ),
        format!("stay: {} steps", cfg.stay),
    ]
}

// Rank-1 sequence from the graph formulation: power-set automaton when it
// fits, otherwise counter automaton with k-shortest enumeration.
fn graph_best(cfg: &RunConfig, set: &MatrixSet) -> Outcome<(SequenceResult, String)> {
    let g = build_time_expanded_graph(set, &[] as &[&str], cfg.horizon.into()).map_err(data)?;
    match build_sequence_dfa(g.ids(), cfg.n, DfaVariant::PowerSet) {
        Ok(dfa) => Ok((shortest_path_product(&g, &dfa), "power-set automaton".into())),
        Err(GraphError::Capacity { .. } | GraphError::AlphabetTooLarge(_)) => {
            let dfa = build_sequence_dfa(g.ids(), cfg.n, DfaVariant::Counter).map_err(data)?;
            let r = k_shortest_unique(&g, &dfa, cfg.max_k).map_err(data)?;
            Ok((r, "counter automaton, k-shortest paths".into()))
        }
        Err(e) => Err(data(e)),
    }
}

fn agree(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

fn cmd_search(cfg: RunConfig) -> Outcome {
    let search = cfg.search();
    search.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (source, ids) = open_source(&cfg)?;
    if cfg.n > ids.len() {
        return usage(format!("N = {} exceeds the {} selected objects", cfg.n, ids.len()));
    }
    let pool = pool(&cfg)?;
    let (set, ranking, graph) = pool.install(|| -> Outcome<_> {
        let set = materialize(&cfg, source, &ids)?;
        let ranking = match cfg.solver {
            Solver::Graph => None,
            _ => Some(dfs_best_sequences(&set, &search.clone().with_objects(&[] as &[&str])).map_err(data)?),
        };
        let graph = match cfg.solver {
            Solver::Dfs => None,
            _ => Some(graph_best(&cfg, &set)?),
        };
        Ok((set, ranking, graph))
    })?;

    let mut head = header(&cfg, &set);
    head.push(format!(
        "N: {}  prune margin: {} m/s  top_k: {}  solver: {:?}",
        cfg.n, cfg.prune_margin, cfg.top_k, cfg.solver
    ));
    let mut verdict = None;
    if let Some((best, how)) = &graph {
        head.push(format!("graph solver: {how}, rank 1 {} at {} m/s", best.labels.join("-"), best.total_dv));
        if let Some(r) = &ranking {
            let dfs = r.first().map_or(f64::INFINITY, |x| x.total_dv);
            let ok = agree(dfs, best.total_dv);
            head.push(format!(
                "solvers agree: {} (dfs {} / graph {}, tolerance 1e-9 relative)",
                if ok { "yes" } else { "NO" },
                dfs,
                best.total_dv
            ));
            verdict = Some((ok, dfs, best.total_dv));
        }
    }
    let results = ranking.unwrap_or_else(|| graph.iter().map(|(r, _)| r.clone()).collect());
    write(&cfg.out.join("report.txt"), report::table("dvchain search", &head, &results))?;
    write(&cfg.out.join("ranking.csv"), report::csv(&results))?;
    echo_config(&cfg)?;
    if let Some(best) = results.first() {
        println!("rank 1: {} {:.1} m/s", best.labels.join("-"), best.total_dv);
    }
    match verdict {
        Some((false, a, b)) => Err(data(anyhow!("solvers disagree on the rank-1 cost: dfs {a}, graph {b}"))),
        Some((true, ..)) => {
            println!("solvers agree");
            Ok(())
        }
        None => Ok(()),
    }
}

fn cmd_budget(cfg: RunConfig) -> Outcome {
    let Some(budget) = cfg.budget else {
        return usage("--budget is required");
    };
    if budget.is_nan() || budget <= 0.0 {
        return usage("--budget must be > 0");
    }
    let (source, ids) = open_source(&cfg)?;
    let pool = pool(&cfg)?;
    let (set, results) = pool.install(|| -> Outcome<_> {
        let set = materialize(&cfg, source, &ids)?;
        let results = budget_max_objects(&set, &[] as &[&str], budget).map_err(data)?;
        Ok((set, results))
    })?;
    let longest = results.first().map_or(0, |r| r.labels.len());
    let mut head = header(&cfg, &set);
    head.push(format!(
        "budget: {budget} m/s  longest sequence: {longest} objects  sequences: {}",
        results.len()
    ));
    let shown = &results[..results.len().min(cfg.top_k)];
    write(&cfg.out.join("budget_report.txt"), report::table("dvchain budget", &head, shown))?;
    write(&cfg.out.join("budget.csv"), report::csv(&results))?;
    echo_config(&cfg)?;
    println!("{} sequences of {longest} objects within {budget} m/s", results.len());
    Ok(())
}

fn cmd_export_graph(cfg: RunConfig, output: &Path) -> Outcome {
    let (source, ids) = open_source(&cfg)?;
    let pool = pool(&cfg)?;
    let set = pool.install(|| materialize(&cfg, source, &ids))?;
    let g = build_time_expanded_graph(&set, &[] as &[&str], cfg.horizon.into()).map_err(data)?;
    write(output, g.to_edge_list())?;
    echo_config(&cfg)?;
    println!(
        "{}: {} nodes, {} transfer edges, {} start edges, {} end edges",
        output.display(),
        g.node_count(),
        g.edge_count(),
        g.start_edge_count(),
        g.end_edge_count()
    );
    Ok(())
}

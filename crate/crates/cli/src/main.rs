use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tightspan::buneman::{buneman_skeleton, BunemanPoint, BunemanSkeleton};
use tightspan::corpus::{random_two_compatible, CorpusConfig, DEFAULT_SEED};
use tightspan::embedder::{certify_theorem, EmbeddingCertificate};
use tightspan::graph::weighted_isomorphic;
use tightspan::realizer::{optimal_realisations, select_minimal_path_saturated, SearchConfig, SearchStrategy};
use tightspan::split::{
    decompose, is_octahedral_free, is_totally_decomposable, is_two_compatible, is_weakly_compatible, split_metric,
    two_compatibility_witness, weak_compatibility_witness, WeightedSplitSystem, OCTAHEDRAL_BOUND,
};
use tightspan::tightspan::{tight_span_graph, tight_span_graph_buneman, tight_span_graph_direct};
use tightspan::{Error, FiniteMetric, WeightedGraph};

/// Split decompositions, tight spans and optimal realisations of finite metrics.
///
/// Input files are either a metric (first line is the number of points,
/// then the labels, then a lower triangle) or a split system
/// (`A labels | B labels : weight` per line).
#[derive(Parser)]
#[command(name = "tightspan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms.
    Validate { input: PathBuf },
    /// Print the split decomposition of a metric.
    Decompose { input: PathBuf },
    /// Report compatibility properties of a split system.
    CheckSplits { input: PathBuf },
    /// Buneman complex counts and a coordinate dump.
    Buneman { input: PathBuf },
    /// Tight-span graph, with a check that both constructions agree.
    Tightspan { input: PathBuf },
    /// All optimal realisations and the selected candidate.
    Realize {
        input: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Run the embedding certificate on a file or on a random corpus.
    Certify {
        #[arg(required_unless_present = "corpus")]
        input: Option<PathBuf>,
        /// Certify this many random two-compatible systems instead.
        #[arg(long, conflicts_with = "input")]
        corpus: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Render a graph as DOT.
    Dot {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Graph::Tightspan)]
        graph: Graph,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Graph {
    Tightspan,
    Buneman,
    Realisation,
    GStar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Auto,
    Topology,
    SplitCube,
}

#[derive(Args)]
struct SearchArgs {
    /// Largest number of auxiliary vertices considered.
    #[arg(long, default_value_t = 4)]
    max_aux: usize,
    #[arg(long)]
    max_degree: Option<usize>,
    /// Work units before giving up.
    #[arg(long)]
    node_budget: Option<u64>,
    /// Seconds before giving up.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Auto)]
    strategy: Strategy,
}

impl SearchArgs {
    fn config(&self) -> anyhow::Result<SearchConfig> {
        let time_limit = match self.time_limit {
            Some(t) if !(t > 0.0 && t.is_finite()) => return Err(anyhow!("--time-limit must be a positive number")),
            t => t.map(Duration::from_secs_f64),
        };
        Ok(SearchConfig {
            max_aux: self.max_aux,
            max_degree: self.max_degree,
            node_budget: self.node_budget,
            time_limit,
            threads: self.threads,
            strategy: match self.strategy {
                Strategy::Auto => SearchStrategy::Auto,
                Strategy::Topology => SearchStrategy::Topology,
                Strategy::SplitCube => SearchStrategy::SplitCube,
            },
            ..SearchConfig::default()
        })
    }
}

enum Input {
    Metric(FiniteMetric),
    Splits(WeightedSplitSystem),
}

impl Input {
    fn metric(&self) -> Result<FiniteMetric, Error> {
        match self {
            Input::Metric(m) => Ok(m.clone()),
            Input::Splits(s) => split_metric(s),
        }
    }

    fn splits(&self) -> Result<WeightedSplitSystem, Error> {
        match self {
            Input::Metric(m) => decompose(m),
            Input::Splits(s) => Ok(s.clone()),
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read_input(path: &Path) -> anyhow::Result<Input> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = content_lines(&text).next().unwrap_or("");
    if first.parse::<usize>().is_ok() {
        FiniteMetric::parse(&text).map(Input::Metric).map_err(|e| name_witness(e, &text))
    } else {
        Ok(Input::Splits(WeightedSplitSystem::parse(&text)?))
    }
}

/// Replaces point indices by labels in axiom errors.
fn name_witness(e: Error, text: &str) -> anyhow::Error {
    let labels: Vec<String> = content_lines(text).nth(1).unwrap_or("").split_whitespace().map(str::to_string).collect();
    let name = |i: usize| labels.get(i).cloned().unwrap_or_else(|| i.to_string());
    match e {
        Error::TriangleViolation(x, y, z) => anyhow!(
            "triangle inequality violated: d({0},{1}) > d({0},{2}) + d({2},{1})",
            name(x),
            name(y),
            name(z)
        ),
        Error::ZeroOffDiagonal(x, y) => anyhow!("zero distance between {} and {}", name(x), name(y)),
        other => other.into(),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn point(p: &[tightspan::Rat]) -> String {
    let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

fn buneman_point(s: &WeightedSplitSystem, p: &BunemanPoint) -> String {
    let coords: Vec<_> = (0..2 * s.len()).map(|side| p.coord(side).clone()).collect();
    point(&coords)
}

fn graph_text(g: &WeightedGraph) -> String {
    let mut out = String::new();
    for v in 0..g.vertex_count() {
        let _ = writeln!(out, "  vertex {v} {}", g.terminal_label(v).unwrap_or("*"));
    }
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "  edge {u} {v} {w}");
    }
    out
}

fn validate(path: &Path) -> anyhow::Result<()> {
    match read_input(path)? {
        Input::Metric(m) => {
            println!("metric on {} points satisfies the axioms", m.len());
            println!("#RESULT valid points {}", m.len());
        }
        Input::Splits(s) => {
            let m = split_metric(&s)?;
            println!("split system on {} points induces a metric", m.len());
            println!("#RESULT valid points {}", m.len());
        }
    }
    Ok(())
}

fn decompose_cmd(path: &Path) -> anyhow::Result<()> {
    let input = read_input(path)?;
    let s = input.splits()?;
    print!("{}", s.to_text());
    println!("#RESULT splits {} two-compatible {}", s.len(), yes(is_two_compatible(&s)));
    Ok(())
}

fn check_splits(path: &Path) -> anyhow::Result<()> {
    let input = read_input(path)?;
    let s = input.splits()?;
    let weak = is_weakly_compatible(&s);
    let two = is_two_compatible(&s);
    let octa = is_octahedral_free(&s, OCTAHEDRAL_BOUND)?;
    println!("weakly-compatible: {}, two-compatible: {}, octahedral-free: {}", yes(weak), yes(two), yes(octa));
    if let Some(w) = weak_compatibility_witness(&s) {
        println!("weak compatibility fails for splits {w:?}");
    }
    if let Some(w) = two_compatibility_witness(&s) {
        println!("pairwise incompatible splits {w:?}");
    }
    let td = is_totally_decomposable(&input.metric()?);
    println!("totally-decomposable: {}", yes(td));
    println!(
        "#RESULT weakly-compatible {} two-compatible {} octahedral-free {} totally-decomposable {}",
        yes(weak),
        yes(two),
        yes(octa),
        yes(td)
    );
    Ok(())
}

fn buneman(path: &Path) -> anyhow::Result<()> {
    let s = read_input(path)?.splits()?;
    let skel = buneman_skeleton(&s)?;
    println!("vertices {} edges {} quadrangles {}", skel.vertices.len(), skel.edges.len(), skel.quads.len());
    print!("{}", skel.dump(&s));
    println!("#RESULT vertices {} edges {} quads {}", skel.vertices.len(), skel.edges.len(), skel.quads.len());
    Ok(())
}

fn tightspan_cmd(path: &Path) -> anyhow::Result<()> {
    let m = read_input(path)?.metric()?;
    let route_a = tight_span_graph_buneman(&m);
    let direct = tight_span_graph_direct(&m);
    let (gd, agree) = match (route_a, direct) {
        (Ok(a), Ok(b)) => {
            let same = weighted_isomorphic(&a.to_weighted_graph(&m), &b.to_weighted_graph(&m)).is_some();
            if !same {
                return Err(Error::Invariant("the two tight-span constructions disagree".into()).into());
            }
            (a, "yes")
        }
        (Ok(a), Err(_)) => (a, "n/a"),
        (Err(_), Ok(b)) => (b, "n/a"),
        (Err(e), Err(_)) => return Err(e.into()),
    };
    for (i, v) in gd.vertices.iter().enumerate() {
        let term = (0..m.len()).find(|&x| m.matrix()[x] == *v).map(|x| m.label(x)).unwrap_or("*");
        println!("vertex {i} {term} {}", point(v));
    }
    for (a, b, w) in &gd.edges {
        println!("edge {a} {b} {w}");
    }
    println!("#RESULT vertices {} edges {} routes-agree {agree}", gd.vertices.len(), gd.edges.len());
    Ok(())
}

fn realize(path: &Path, search: &SearchArgs) -> anyhow::Result<()> {
    let m = read_input(path)?.metric()?;
    let out = optimal_realisations(&m, &search.config()?)?;
    println!("optimum {} ({} realisations, {:?} search)", out.optimum, out.realisations.len(), out.strategy);
    if !out.complete {
        println!("warning: budget ran out, list may be incomplete");
    }
    for (i, r) in out.realisations.iter().enumerate() {
        println!("realisation {i}: length {} gamma {} vertices {}", r.length, r.gamma_count, r.vertex_count());
        print!("{}", graph_text(&r.graph));
        print!("{}", r.graph.to_dot(&format!("realisation_{i}")));
    }
    let chosen = select_minimal_path_saturated(&out.realisations)?;
    let index = out.realisations.iter().position(|r| *r == chosen).unwrap_or(0);
    println!("selected realisation {index}");
    println!("#RESULT optimum {} gamma {} vertices {}", chosen.length, chosen.gamma_count, chosen.vertex_count());
    Ok(())
}

fn print_certificate(c: &EmbeddingCertificate) {
    let s = &c.splits;
    println!("[decompose] {} splits, two-compatible", s.len());
    print!("{}", s.to_text());
    println!("[tightspan] {} vertices, {} edges", c.tight_span.vertices.len(), c.tight_span.edges.len());
    let r = &c.realisation;
    println!("[realize] length {} gamma {} vertices {}", r.length, r.gamma_count, r.vertex_count());
    print!("{}", graph_text(&r.graph));
    println!("[psi]");
    for (v, (img, pre)) in c.psi_images.iter().zip(&c.psi_prime_images).enumerate() {
        println!("  {v} -> {} <- {}", point(img), buneman_point(s, pre));
    }
    println!("[vertex-images] all realisation vertices map to Buneman vertices");
    println!("[g-star] {} chosen paths", c.chosen_paths.len());
    for ((u, v), path) in &c.chosen_paths {
        let hops: Vec<String> = path.vertices().iter().map(|x| x.to_string()).collect();
        println!("  {u}-{v}: {}", hops.join(" "));
    }
    print!("{}", graph_text(&c.g_star));
    let map: Vec<String> = c.witness.iter().enumerate().map(|(a, b)| format!("{a}->{b}")).collect();
    println!("[homeomorphism] suppressed G* is isomorphic to the realisation: {}", map.join(" "));
}

fn certify(input: Option<&Path>, corpus: Option<usize>, seed: u64, search: &SearchArgs) -> anyhow::Result<()> {
    let cfg = search.config()?;
    if let Some(count) = corpus {
        let systems = random_two_compatible(&CorpusConfig { count, seed, ..CorpusConfig::default() });
        for (i, s) in systems.iter().enumerate() {
            let m = split_metric(s)?;
            let c = certify_theorem(&m, &cfg).with_context(|| format!("instance {i}:\n{}", s.to_text()))?;
            println!("instance {i}: {} points, {} splits, length {}", m.len(), s.len(), c.realisation.length);
        }
        println!("#RESULT certified {count} seed {seed}");
        return Ok(());
    }
    let path = input.ok_or_else(|| anyhow!("an input file or --corpus is required"))?;
    let m = read_input(path)?.metric()?;
    let c = certify_theorem(&m, &cfg)?;
    print_certificate(&c);
    println!(
        "#RESULT certified length {} vertices {} tightspan-vertices {}",
        c.realisation.length,
        c.realisation.vertex_count(),
        c.tight_span.vertices.len()
    );
    Ok(())
}

fn dot(path: &Path, graph: Graph, search: &SearchArgs) -> anyhow::Result<()> {
    let input = read_input(path)?;
    let m = input.metric()?;
    let text = match graph {
        Graph::Tightspan => tight_span_graph(&m)?.to_dot(&m),
        Graph::Buneman => {
            let s = input.splits()?;
            let skel: BunemanSkeleton = buneman_skeleton(&s)?;
            skel.to_dot(&s)
        }
        Graph::Realisation => {
            let out = optimal_realisations(&m, &search.config()?)?;
            select_minimal_path_saturated(&out.realisations)?.graph.to_dot("realisation")
        }
        Graph::GStar => certify_theorem(&m, &search.config()?)?.g_star.to_dot("g_star"),
    };
    print!("{text}");
    Ok(())
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let Some(err) = e.chain().find_map(|c| c.downcast_ref::<Error>()) else { return 1 };
    match err.root() {
        Error::BudgetExceeded | Error::SearchBoundTooSmall(_) => 2,
        Error::Invariant(_)
        | Error::NotInTightSpan(_)
        | Error::NoPreimage(_)
        | Error::NoValidPathSystem
        | Error::ResidueNonZero(..)
        | Error::NotARealisation => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { input } => validate(input),
        Command::Decompose { input } => decompose_cmd(input),
        Command::CheckSplits { input } => check_splits(input),
        Command::Buneman { input } => buneman(input),
        Command::Tightspan { input } => tightspan_cmd(input),
        Command::Realize { input, search } => realize(input, search),
        Command::Certify { input, corpus, seed, search } => certify(input.as_deref(), *corpus, *seed, search),
        Command::Dot { input, graph, search } => dot(input, *graph, search),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(exit_code(&anyhow!(Error::TooFewPoints)), 1);
        assert_eq!(exit_code(&anyhow!(Error::BudgetExceeded.at_stage("realize"))), 2);
        assert_eq!(exit_code(&anyhow!(Error::NoValidPathSystem)), 3);
        assert_eq!(exit_code(&anyhow!("io")), 1);
    }

    #[test]
    fn witness_uses_labels() {
        let e = name_witness(Error::TriangleViolation(0, 1, 2), "3\na b c\n1\n5 1\n");
        assert!(e.to_string().contains("d(a,b) > d(a,c) + d(c,b)"));
    }

}

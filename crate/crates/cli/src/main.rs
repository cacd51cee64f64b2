use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use multiarr::arrangement::{
    characteristic_polynomial, free_exponents_from_charpoly, intersection_lattice, ziegler_multiplicity,
    MultiArrangement,
};
use multiarr::catalog::tables::{find_table, replay_table};
use multiarr::catalog::{fixtures_dir, intermediate, load_fixture, write_fixture, IntermediateSpec};
use multiarr::induction::{
    additive_refuter, emit_induction_table, hereditarily_inductively_free, is_inductively_free_with, table_json,
    CertificateJson, Hereditary, InductionCertificate, RefutationVerdict, SearchOptions, TableStart, Verdict,
};
use multiarr::rank2::euler_multiplicity;
use multiarr::verify::{run_check, select, Status as CheckStatus};

#[derive(Parser)]
#[command(name = "multiarr", version, about = "Exact computations with hyperplane multiarrangements")]
struct Cli {
    /// Emit one JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// Fixture file, or the name of a shipped fixture.
    #[arg(long, conflicts_with = "spec")]
    fixture: Option<String>,
    /// Intermediate arrangement A:r:l:k (simple multiplicity).
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Flats of the intersection lattice, counted by rank.
    Lattice {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        max_rank: Option<usize>,
        /// List every flat by the labels it contains.
        #[arg(long)]
        full: bool,
    },
    /// Characteristic polynomial and its roots when it splits.
    Charpoly {
        #[command(flatten)]
        input: Input,
    },
    /// Ziegler restriction at a hyperplane, in the fixture format.
    Ziegler {
        #[command(flatten)]
        input: Input,
        /// Hyperplane label or 1-based position.
        #[arg(long)]
        at: String,
    },
    /// Euler restriction at a hyperplane, in the fixture format.
    Euler {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        at: String,
    },
    /// Decide inductive freeness and print an induction table.
    Indfree {
        #[command(flatten)]
        input: Input,
        /// Decide the Ziegler restriction at this hyperplane instead.
        #[arg(long)]
        ziegler: Option<String>,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
        /// Start the table at the empty arrangement rather than the simple one.
        #[arg(long)]
        from_empty: bool,
    },
    /// Decide the arrangement and all its restrictions.
    Hereditary {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
    },
    /// Backward search for an additive chain with given exponents.
    Refute {
        #[command(flatten)]
        input: Input,
        /// Comma-separated virtual exponents.
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<u64>,
        #[arg(long, default_value_t = 5_000_000)]
        budget: u64,
    },
    /// Replay a shipped induction table row by row.
    Table {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
    },
    /// Run the end-to-end checks on the shipped data.
    VerifyPaper {
        /// Restrict to these checks (key or number).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Read fixtures from this directory.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Ok,
    Refuted,
    Unknown,
    Error,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Refuted => "refuted",
            Status::Unknown => "unknown",
            Status::Error => "error",
        }
    }

    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Refuted => 1,
            Status::Unknown => 2,
            Status::Error => 3,
        }
    }
}

struct Outcome {
    status: Status,
    text: String,
    payload: Value,
}

impl Outcome {
    fn ok(text: String, payload: Value) -> Outcome {
        Outcome {
            status: Status::Ok,
            text,
            payload,
        }
    }
}

fn load_input(input: &Input) -> Result<MultiArrangement> {
    match (&input.fixture, &input.spec) {
        (Some(f), None) => {
            let path = Path::new(f);
            let path = if path.exists() { path.to_path_buf() } else { fixtures_dir().join(f) };
            if !path.exists() {
                bail!("no fixture at '{f}'");
            }
            Ok(load_fixture(&path)?)
        }
        (None, Some(s)) => Ok(MultiArrangement::simple(intermediate(IntermediateSpec::parse(s)?))),
        _ => bail!("give exactly one of --fixture or --spec"),
    }
}

fn hyperplane(m: &MultiArrangement, label: &str) -> Result<usize> {
    m.arrangement()
        .find_label(label)
        .ok_or_else(|| anyhow!("no hyperplane '{label}'"))
}

fn set(e: &[u64]) -> String {
    let parts: Vec<String> = e.iter().map(u64::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

/// Prints the node count to standard error until dropped.
struct Progress {
    done: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Progress {
    fn watch(counter: Arc<AtomicU64>, what: &'static str) -> Progress {
        let done = Arc::new(AtomicBool::new(false));
        let flag = done.clone();
        let handle = std::thread::spawn(move || {
            let mut ticks = 0u32;
            while !flag.load(Ordering::Relaxed) {
                std::thread::sleep(Duration::from_millis(100));
                ticks += 1;
                if ticks % 20 == 0 {
                    eprintln!("{what}: {} states explored", counter.load(Ordering::Relaxed));
                }
            }
        });
        Progress {
            done,
            handle: Some(handle),
        }
    }
}

impl Drop for Progress {
    fn drop(&mut self) {
        self.done.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn cmd_lattice(input: &Input, max_rank: Option<usize>, full: bool) -> Result<Outcome> {
    let m = load_input(input)?;
    let arr = m.arrangement();
    let lattice = intersection_lattice(arr, max_rank);
    let counts = lattice.counts();
    let mut text = String::new();
    for (k, c) in counts.iter().enumerate() {
        text.push_str(&format!("rank {k}: {c}\n"));
    }
    text.push_str(&format!("total: {}\n", lattice.len()));
    let mut flats = Vec::new();
    if full {
        for f in lattice.flats() {
            let labels: Vec<&str> = f.closed().iter().map(|&i| arr.label(i)).collect();
            text.push_str(&format!("{} [{}]\n", f.rank(), labels.join(" ")));
            flats.push(json!({ "rank": f.rank(), "hyperplanes": labels }));
        }
    }
    let mut payload = json!({ "counts": counts, "total": lattice.len() });
    if full {
        payload["flats"] = Value::Array(flats);
    }
    Ok(Outcome::ok(text, payload))
}

fn cmd_charpoly(input: &Input) -> Result<Outcome> {
    let m = load_input(input)?;
    let chi = characteristic_polynomial(m.arrangement());
    let roots = free_exponents_from_charpoly(m.arrangement()).ok();
    let mut text = format!("chi(t) = {chi}\n");
    if let Some(r) = &roots {
        let r: Vec<u64> = r.iter().map(|&e| e as u64).collect();
        text.push_str(&format!("roots {}\n", set(&r)));
    } else {
        text.push_str("does not split over the nonnegative integers\n");
    }
    Ok(Outcome::ok(text, json!({ "coefficients": chi.0, "roots": roots })))
}

fn cmd_ziegler(input: &Input, at: &str) -> Result<Outcome> {
    let m = load_input(input)?;
    let h0 = hyperplane(&m, at)?;
    let z = ziegler_multiplicity(m.arrangement(), h0)?;
    Ok(restricted_outcome(&z.multi))
}

fn cmd_euler(input: &Input, at: &str) -> Result<Outcome> {
    let m = load_input(input)?;
    let h0 = hyperplane(&m, at)?;
    let e = euler_multiplicity(&m, h0)?;
    Ok(restricted_outcome(&e.multi))
}

fn restricted_outcome(r: &MultiArrangement) -> Outcome {
    let arr = r.arrangement();
    let forms: Vec<Value> = (0..arr.len())
        .map(|i| json!({ "label": arr.label(i), "form": arr.form(i).to_string(), "mult": r.mult()[i] }))
        .collect();
    Outcome::ok(
        write_fixture(r),
        json!({ "dim": r.dim(), "zeta": arr.order(), "order": r.order(), "forms": forms }),
    )
}

fn certificate_payload(cert: &InductionCertificate, start: TableStart) -> Value {
    json!({
        "exponents": cert.exponents(),
        "certificate": CertificateJson::from(cert),
        "table": table_json(cert, start),
    })
}

fn cmd_indfree(input: &Input, ziegler: Option<&str>, budget: u64, from_empty: bool) -> Result<Outcome> {
    let mut m = load_input(input)?;
    if let Some(h) = ziegler {
        let h0 = hyperplane(&m, h)?;
        m = ziegler_multiplicity(m.arrangement(), h0)?.multi;
    }
    let counter = Arc::new(AtomicU64::new(0));
    let report = {
        let _progress = Progress::watch(counter.clone(), "indfree");
        is_inductively_free_with(
            &m,
            SearchOptions {
                budget,
                progress: Some(counter),
                ..SearchOptions::default()
            },
        )
    };
    eprintln!("indfree: {} states explored", report.nodes);
    let start = if from_empty || m.is_simple() { TableStart::Empty } else { TableStart::Simple };
    Ok(match &report.verdict {
        Verdict::Yes(cert) => {
            let text = format!(
                "inductively free, exponents {}\n\n{}",
                set(&cert.exponents()),
                emit_induction_table(cert, start)
            );
            let mut payload = certificate_payload(cert, start);
            payload["verdict"] = json!("yes");
            payload["nodes"] = json!(report.nodes);
            Outcome::ok(text, payload)
        }
        Verdict::No => Outcome {
            status: Status::Refuted,
            text: "not inductively free\n".into(),
            payload: json!({ "verdict": "no", "nodes": report.nodes }),
        },
        Verdict::Unknown => Outcome {
            status: Status::Unknown,
            text: format!("undecided within {budget} states\n"),
            payload: json!({ "verdict": "unknown", "nodes": report.nodes }),
        },
    })
}

fn cmd_hereditary(input: &Input, budget: u64) -> Result<Outcome> {
    let m = load_input(input)?;
    if !m.is_simple() {
        bail!("hereditary checks apply to simple arrangements");
    }
    Ok(match hereditarily_inductively_free(m.arrangement(), budget) {
        Hereditary::Yes { restrictions } => Outcome::ok(
            format!("hereditarily inductively free ({restrictions} distinct restrictions)\n"),
            json!({ "verdict": "yes", "restrictions": restrictions }),
        ),
        Hereditary::No { flat, verdict } => {
            let labels: Vec<&str> = flat.iter().map(|&i| m.arrangement().label(i)).collect();
            Outcome {
                status: if verdict == "unknown" { Status::Unknown } else { Status::Refuted },
                text: format!("restriction to [{}] is {verdict}\n", labels.join(" ")),
                payload: json!({ "verdict": verdict, "flat": labels }),
            }
        }
    })
}

fn cmd_refute(input: &Input, exponents: &[u64], budget: u64) -> Result<Outcome> {
    let m = load_input(input)?;
    let r = additive_refuter(&m, exponents, budget)?;
    let mut payload = json!({
        "explored": r.explored,
        "dead_end_count": r.dead_end_count,
        "dead_ends": r.dead_ends,
        "max_depth": r.max_depth,
    });
    let summary = format!(
        "explored {} states, {} dead ends, max depth {}\n",
        r.explored, r.dead_end_count, r.max_depth
    );
    Ok(match r.verdict {
        RefutationVerdict::ChainFound(chain) => {
            let mut text = format!("chain found\n{summary}\n");
            let rows: Vec<Value> = chain
                .iter()
                .map(|s| {
                    text.push_str(&format!(
                        "{:<16} delete {:<8} |mu*| = {}\n",
                        set(&s.virtual_exponents),
                        s.label,
                        s.restriction_order
                    ));
                    json!([s.virtual_exponents, s.label, s.restriction_order])
                })
                .collect();
            payload["verdict"] = json!("chain");
            payload["chain"] = Value::Array(rows);
            Outcome::ok(text, payload)
        }
        RefutationVerdict::Refuted => {
            payload["verdict"] = json!("refuted");
            Outcome {
                status: Status::Refuted,
                text: format!("not additively free with exponents {}\n{summary}", set(exponents)),
                payload,
            }
        }
        RefutationVerdict::BudgetExhausted => {
            payload["verdict"] = json!("unknown");
            Outcome {
                status: Status::Unknown,
                text: format!("budget exhausted\n{summary}"),
                payload,
            }
        }
    })
}

fn cmd_table(input: &Input, budget: u64) -> Result<Outcome> {
    let name = input
        .fixture
        .as_deref()
        .ok_or_else(|| anyhow!("table needs --fixture naming a shipped table"))?;
    let file = Path::new(name).file_name().and_then(|f| f.to_str()).unwrap_or(name);
    let table = find_table(file).ok_or_else(|| anyhow!("no shipped table for '{name}'"))?;
    let dir = match Path::new(name).parent() {
        Some(p) if Path::new(name).exists() && !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => fixtures_dir(),
    };
    let cert = replay_table(&dir, table, budget)?;
    let text = format!("{}\n\n{}", table.name, emit_induction_table(&cert, TableStart::Simple));
    let mut payload = certificate_payload(&cert, TableStart::Simple);
    payload["name"] = json!(table.name);
    Ok(Outcome::ok(text, payload))
}

fn cmd_verify(only: &[String], fixtures: Option<&Path>) -> Result<Outcome> {
    let checks = select(only).map_err(|e| anyhow!(e))?;
    let dir = fixtures.map_or_else(fixtures_dir, Path::to_path_buf);
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut failed = false;
    for check in checks {
        eprintln!("verify: [{}] {}", check.id, check.title);
        let r = run_check(check, &dir);
        let mark = match r.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => {
                failed = true;
                "FAIL"
            }
            CheckStatus::Limitation => "LIMITATION",
        };
        text.push_str(&format!("{:>2} {:<10} {:<10} {}\n", r.id, r.key, mark, r.detail));
        rows.push(json!({ "id": r.id, "key": r.key, "status": r.status, "detail": r.detail }));
    }
    Ok(Outcome {
        status: if failed { Status::Error } else { Status::Ok },
        text,
        payload: json!({ "checks": rows }),
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Lattice { input, max_rank, full } => cmd_lattice(input, *max_rank, *full),
        Command::Charpoly { input } => cmd_charpoly(input),
        Command::Ziegler { input, at } => cmd_ziegler(input, at),
        Command::Euler { input, at } => cmd_euler(input, at),
        Command::Indfree {
            input,
            ziegler,
            budget,
            from_empty,
        } => cmd_indfree(input, ziegler.as_deref(), *budget, *from_empty),
        Command::Hereditary { input, budget } => cmd_hereditary(input, *budget),
        Command::Refute {
            input,
            exponents,
            budget,
        } => cmd_refute(input, exponents, *budget),
        Command::Table { input, budget } => cmd_table(input, *budget),
        Command::VerifyPaper { only, fixtures } => cmd_verify(only, fixtures.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).unwrap_or_else(|e| Outcome {
        status: Status::Error,
        text: String::new(),
        payload: json!({ "message": format!("{e:#}") }),
    });
    if cli.json {
        let mut doc = json!({ "status": outcome.status.name() });
        if let Value::Object(map) = outcome.payload {
            doc.as_object_mut().expect("object").extend(map);
        }
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else if outcome.status == Status::Error && outcome.text.is_empty() {
        eprintln!("error: {}", outcome.payload["message"].as_str().unwrap_or("unknown"));
    } else {
        print!("{}", outcome.text);
    }
    ExitCode::from(outcome.status.code())
}

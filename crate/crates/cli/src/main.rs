use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use invforge::constructions::{self, CaseSpec};
use invforge::gf::FieldSpec;
use invforge::groups::{ActionSpace, GroupKind};
use invforge::lab::{self, BasisMode, HilbertData, VerificationReport, VerifyOptions};
use serde::{Deserialize, Serialize};

const DEFAULT_Q: [u64; 4] = [2, 3, 4, 5];

#[derive(Parser)]
#[command(name = "invforge", version, about = "Exact invariant rings of 2x2 matrix conjugation actions over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check for the selected cases and write a report.
    Verify(Selection),
    /// Print the generating invariants of the selected cases.
    Invariants {
        #[command(flatten)]
        sel: Selection,
        /// Also print a basis of the invariants of this degree.
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Print computed against expected invariant dimensions.
    Hilbert(Selection),
}

#[derive(Args, Clone, Default)]
struct Selection {
    #[arg(long)]
    group: Option<GroupKind>,
    #[arg(long)]
    space: Option<ActionSpace>,
    /// Field order; may be repeated.
    #[arg(long = "q")]
    q: Vec<u64>,
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct CaseSelector {
    group: Option<GroupKind>,
    space: Option<ActionSpace>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    cases: Vec<CaseSelector>,
    q_list: Vec<u64>,
    max_degree: Option<u32>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

struct Plan {
    cases: Vec<CaseSpec>,
    max_degree: Option<u32>,
    out: Option<PathBuf>,
    format: Format,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn plan(sel: &Selection, default_format: Format) -> Result<Plan, String> {
    let config: RunConfig = match &sel.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let selectors = if sel.group.is_some() || sel.space.is_some() || config.cases.is_empty() {
        vec![CaseSelector { group: sel.group, space: sel.space }]
    } else {
        config.cases.clone()
    };
    let qs = if !sel.q.is_empty() {
        sel.q.clone()
    } else if !config.q_list.is_empty() {
        config.q_list.clone()
    } else {
        DEFAULT_Q.to_vec()
    };
    let mut cases = Vec::new();
    for q in qs {
        let field = Arc::new(FieldSpec::of_order(q).map_err(|e| format!("--q {q}: {e}"))?);
        for s in &selectors {
            if let (Some(g), Some(sp)) = (s.group, s.space) {
                CaseSpec::new(g, sp, field.clone()).map_err(|e| e.to_string())?;
            }
            let before = cases.len();
            cases.extend(
                CaseSpec::all(&field)
                    .into_iter()
                    .filter(|c| s.group.is_none_or(|g| g == c.group) && s.space.is_none_or(|sp| sp == c.space)),
            );
            if cases.len() == before {
                return Err("no case matches the selection".into());
            }
        }
    }
    Ok(Plan {
        cases,
        max_degree: sel.max_degree.or(config.max_degree),
        out: sel.out.clone().or(config.output),
        format: sel.format.or(config.format).unwrap_or(default_format),
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(sel: &Selection) -> ExitCode {
    let plan = match plan(sel, Format::Json) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let reports: Vec<VerificationReport> = plan
        .cases
        .iter()
        .map(|c| {
            eprintln!("verifying {c}");
            lab::verify_case(c, &VerifyOptions { max_degree: plan.max_degree, quadratic: None })
        })
        .collect();
    let text = match plan.format {
        Format::Json if reports.len() == 1 => reports[0].to_json() + "\n",
        Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
        Format::Csv if reports.len() == 1 => reports[0].dims_csv(),
        Format::Csv => {
            let mut s = String::from("group,space,q,degree,computed,expected\n");
            for r in &reports {
                for line in r.dims_csv().lines().skip(1) {
                    s.push_str(&format!("{},{},{},{line}\n", r.case.group, r.case.space, r.case.q));
                }
            }
            s
        }
        Format::Text => reports.iter().map(VerificationReport::to_text).collect(),
    };
    if let Err(e) = emit(&plan.out, &text) {
        return usage(e);
    }
    for r in reports.iter().filter(|r| !r.passed()) {
        for c in r.checks.iter().filter(|c| !c.pass) {
            eprintln!("FAIL {}/{} q={} {}: expected {}, observed {}", r.case.group, r.case.space, r.case.q, c.name, c.expected, c.observed);
        }
    }
    if reports.iter().all(VerificationReport::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn invariants(sel: &Selection, degree: Option<u32>) -> ExitCode {
    let plan = match plan(sel, Format::Text) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let mut text = String::new();
    for case in &plan.cases {
        text.push_str(&format!("# {case}\n"));
        if case.same_as_gl2() {
            text.push_str(&format!("same as gl2: the image of sl2 equals that of gl2 over F_{}\n", case.q()));
        }
        let suite = match constructions::build_suite(case, &case.field.irreducible_quadratic()) {
            Ok(s) => s,
            Err(e) => return usage(e),
        };
        for np in &suite.primaries {
            text.push_str(&format!("{} = {}\n", np.name, np.poly));
        }
        match &suite.secondary {
            Some(np) => text.push_str(&format!("{} = {}\n", np.name, np.poly)),
            None if suite.expected_secondary_degree.is_some() => {
                let d = suite.expected_secondary_degree.unwrap_or(0);
                text.push_str(&format!("# secondary of degree {d} is found by search in verify\n"));
            }
            None => {}
        }
        for np in &suite.auxiliary {
            text.push_str(&format!("{} = {}\n", np.name, np.poly));
        }
        if let Some(d) = degree {
            let action = match case.action() {
                Ok(a) => a,
                Err(e) => return usage(e),
            };
            match lab::invariant_basis(&action, d, BasisMode::Generators) {
                Ok(basis) => {
                    text.push_str(&format!("# degree {d} basis ({} elements)\n", basis.len()));
                    for p in basis {
                        text.push_str(&format!("{p}\n"));
                    }
                }
                Err(e) => return usage(e),
            }
        }
    }
    match emit(&plan.out, &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage(e),
    }
}

#[derive(Serialize)]
struct HilbertRow<'a> {
    case: invforge::constructions::CaseLabel,
    #[serde(flatten)]
    data: &'a HilbertData,
}

fn hilbert(sel: &Selection) -> ExitCode {
    let plan = match plan(sel, Format::Text) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let mut rows = Vec::new();
    for case in &plan.cases {
        let action = match case.action() {
            Ok(a) => a,
            Err(e) => return usage(e),
        };
        let d = plan.max_degree.unwrap_or_else(|| lab::default_max_degree(case));
        match lab::hilbert_function(case, &action, d) {
            Ok(h) => rows.push((case, h)),
            Err(e) => return usage(e),
        }
    }
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let text = match plan.format {
        Format::Text => rows
            .iter()
            .map(|(c, h)| format!("# {c}\ncomputed: {}\nexpected: {}\n", join(&h.dims), join(&h.expected)))
            .collect(),
        Format::Csv => {
            let mut s = String::from("group,space,q,degree,computed,expected\n");
            for (c, h) in &rows {
                for (d, (a, b)) in h.dims.iter().zip(&h.expected).enumerate() {
                    s.push_str(&format!("{},{},{},{d},{a},{b}\n", c.group, c.space, c.q()));
                }
            }
            s
        }
        Format::Json => {
            let out: Vec<HilbertRow> = rows.iter().map(|(c, h)| HilbertRow { case: c.label(), data: h }).collect();
            serde_json::to_string_pretty(&out).expect("rows serialize") + "\n"
        }
    };
    if let Err(e) = emit(&plan.out, &text) {
        return usage(e);
    }
    if rows.iter().all(|(_, h)| h.matches()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("INVFORGE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match &cli.command {
        Command::Verify(sel) => verify(sel),
        Command::Invariants { sel, degree } => invariants(sel, *degree),
        Command::Hilbert(sel) => hilbert(sel),
    }
}

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sps_core::bounds::verify_rank_bounds;
use sps_core::circuit::{gen_interpolation_identity, gen_random, is_simple, vanishing_subset};
use sps_core::format::{parse_circuit, write_circuit};
use sps_core::nucleus::{build_mat_nucleus, build_nucleus, nucleus_identity};
use sps_core::path::{path_identity_test, IdentityVerdict};
use sps_core::pit::{
    blackbox_test, hitting_set, schwartz_zippel_test, BlackboxVerdict, RandomVerdict, SubprocessOracle,
};
use sps_core::report::{
    envelope, render, CertificateDto, CheckDto, CircuitDto, HittingSetDto, MethodDto, NucleusDto, SgDto,
};
use sps_core::sg::{
    gen_fp_config, gen_line, gen_skew_lines, sg_growth_check, sg_operator, SgConfig, DEFAULT_SUBSET_CAP,
};
use sps_core::{Circuit, Error, FieldSpec, Limits};

#[derive(Parser)]
#[command(
    name = "sps-lab",
    version,
    about = "Depth-3 identity testing and Sylvester-Gallai tooling"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a circuit file computes the zero polynomial.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Path)]
        method: Method,
        /// Required by the random method.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
    /// Emit a hitting set, or test an external evaluator against it.
    HittingSet {
        #[arg(short)]
        k: usize,
        #[arg(short)]
        d: usize,
        #[arg(short)]
        n: usize,
        #[arg(long, default_value = "rational")]
        field: String,
        /// Program answering one `point [..]` line with one scalar line.
        #[arg(long)]
        oracle: Option<String>,
        /// Arguments for the oracle program; takes the rest of the line.
        #[arg(long, requires = "oracle", allow_hyphen_values = true, num_args = 1..)]
        oracle_args: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Nucleus of a simple minimal identity, with the rank-bound table.
    Nucleus {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = StageArg::Full)]
        stage: StageArg,
        /// Independent terms (zero-based, comma separated).
        #[arg(long, value_delimiter = ',')]
        indep: Option<Vec<usize>>,
        #[arg(long)]
        json: bool,
    },
    /// Closure, operator and growth reports for a vector configuration.
    Sg {
        file: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SgOp::Closed)]
        op: SgOp,
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        cap: u128,
        #[arg(long)]
        json: bool,
    },
    /// Write a generated circuit or configuration.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
        #[arg(long, global = true, default_value = "rational")]
        field: String,
    },
    /// Time the standard workloads.
    Bench {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Path,
    Blackbox,
    Random,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    Mat,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SgOp {
    Closed,
    Operator,
    Growth,
}

#[derive(Subcommand)]
enum Family {
    Interp { k: usize },
    Random { k: usize, d: usize, n: usize, seed: u64 },
    Line,
    SkewLines,
    Fp { k: usize, r: usize, p: u64 },
}

enum Failure {
    Core(Error),
    Io(String),
    Disagree,
    Usage(String),
    /// Precondition failure with a diagnosis and optional JSON attachment.
    Rejected(String, Option<Value>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Check {
            file,
            method,
            seed,
            trials,
            json,
        } => cmd_check(&file, method, seed, trials, json),
        Cmd::HittingSet {
            k,
            d,
            n,
            field,
            oracle,
            oracle_args,
            json,
        } => cmd_hitting_set(k, d, n, &field, oracle.as_deref(), &oracle_args, json),
        Cmd::Nucleus {
            file,
            stage,
            indep,
            json,
        } => cmd_nucleus(&file, stage, indep.as_deref(), json),
        Cmd::Sg { file, k, op, cap, json } => cmd_sg(&file, k, op, cap, json),
        Cmd::Gen { family, output, field } => cmd_gen(family, output.as_deref(), &field),
        Cmd::Bench { json } => cmd_bench(json),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Disagree => (1, "methods disagree".to_string()),
                Failure::Io(m) | Failure::Usage(m) => (2, m),
                Failure::Rejected(m, attach) => {
                    if let Some(v) = attach {
                        println!("{}", serde_json::to_string_pretty(&v).unwrap());
                    }
                    (4, m)
                }
                Failure::Core(e) => {
                    let code = match e {
                        Error::Parse { .. } | Error::Input(_) => 2,
                        Error::Resource(_) => 3,
                        Error::Precondition(_) => 4,
                        Error::Structural(_) => 1,
                    };
                    (code, e.to_string())
                }
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read(path: &FsPath) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &FsPath) -> Result<Circuit, Failure> {
    Ok(parse_circuit(&read(path)?)?.into_circuit()?)
}

fn point_str(p: &[String]) -> String {
    format!("[{}]", p.join(","))
}

fn cmd_check(file: &FsPath, method: Method, seed: Option<u64>, trials: usize, json: bool) -> Outcome {
    let c = load_circuit(file)?;
    let run = |m: Method| method == m || method == Method::All;
    let mut results = Vec::new();
    if run(Method::Path) {
        let r = match path_identity_test(&c)? {
            IdentityVerdict::Zero => MethodDto {
                method: "path".into(),
                verdict: "ZERO".into(),
                certificate: None,
                witness: None,
                note: None,
            },
            IdentityVerdict::NonZero(cert) => MethodDto {
                method: "path".into(),
                verdict: "NONZERO".into(),
                certificate: Some(CertificateDto::from_certificate(&cert)),
                witness: None,
                note: None,
            },
        };
        results.push(r);
    }
    if run(Method::Blackbox) {
        let h = hitting_set(c.fanin(), c.degree().max(1), c.nvars, c.field)?;
        let out = blackbox_test(|p| Ok(c.evaluate(p)), &h)?;
        let (verdict, witness) = match out.verdict {
            BlackboxVerdict::Zero => ("ZERO", None),
            BlackboxVerdict::NonZero(p) => ("NONZERO", Some(p.iter().map(|s| s.to_string()).collect())),
        };
        results.push(MethodDto {
            method: "blackbox".into(),
            verdict: verdict.into(),
            certificate: None,
            witness,
            note: Some(format!("{} of {} points evaluated", out.evaluations, h.len())),
        });
    }
    if run(Method::Random) {
        let Some(seed) = seed else {
            return Err(Failure::Usage("--seed is required for the random method".into()));
        };
        let out = schwartz_zippel_test(&c, trials, seed);
        let (verdict, witness) = match out.verdict {
            RandomVerdict::ProbablyZero => ("PROBABLY_ZERO", None),
            RandomVerdict::NonZero(p) => ("NONZERO", Some(p.iter().map(|s| s.to_string()).collect())),
        };
        let mut note = format!(
            "{} trials, per-trial error <= {:.4}",
            out.trials_run, out.per_trial_error
        );
        if let Some(w) = out.warning {
            note = format!("{note}; {w}");
        }
        results.push(MethodDto {
            method: "random".into(),
            verdict: verdict.into(),
            certificate: None,
            witness,
            note: Some(note),
        });
    }
    let zero: Vec<bool> = results.iter().map(|r| r.verdict != "NONZERO").collect();
    let agree = zero.iter().all(|&z| z == zero[0]);
    if json {
        println!(
            "{}",
            render(
                "check",
                &CheckDto {
                    circuit: Some(CircuitDto::from_circuit(&c)),
                    results: results.clone(),
                    agree,
                }
            )
        );
    } else {
        for r in &results {
            let mut line = format!("{}: {}", r.method, r.verdict);
            if let Some(w) = &r.witness {
                line.push_str(&format!(" at {}", point_str(w)));
            }
            if let Some(n) = &r.note {
                line.push_str(&format!(" ({n})"));
            }
            println!("{line}");
            if let Some(cert) = &r.certificate {
                println!("{}", render("certificate", cert));
            }
        }
        let all: Vec<&str> = results.iter().map(|r| r.verdict.as_str()).collect();
        println!("{}", all.join(" / "));
    }
    if agree {
        Ok(())
    } else {
        Err(Failure::Disagree)
    }
}

fn cmd_hitting_set(
    k: usize,
    d: usize,
    n: usize,
    field: &str,
    oracle: Option<&str>,
    oracle_args: &[String],
    json: bool,
) -> Outcome {
    let field: FieldSpec = field.parse()?;
    let h = hitting_set(k, d, n, field)?;
    let Some(prog) = oracle else {
        if json {
            println!("{}", render("hitting-set", &HittingSetDto::new(&h)));
        } else {
            print!("{}", h.to_text());
        }
        return Ok(());
    };
    let mut o = SubprocessOracle::spawn(field, prog, oracle_args)?;
    let out = blackbox_test(|p| o.eval(p), &h)?;
    let (verdict, witness) = match &out.verdict {
        BlackboxVerdict::Zero => ("ZERO", None),
        BlackboxVerdict::NonZero(p) => ("NONZERO", Some(p.iter().map(|s| s.to_string()).collect::<Vec<_>>())),
    };
    if json {
        let dto = MethodDto {
            method: "blackbox".into(),
            verdict: verdict.into(),
            certificate: None,
            witness,
            note: out.warning,
        };
        println!(
            "{}",
            render(
                "check",
                &CheckDto {
                    circuit: None,
                    results: vec![dto],
                    agree: true,
                }
            )
        );
    } else {
        match witness {
            Some(w) => println!("NONZERO at {}", point_str(&w)),
            None => println!("ZERO ({} points)", out.evaluations),
        }
        if let Some(w) = out.warning {
            eprintln!("warning: {w}");
        }
    }
    Ok(())
}

fn diagnose(c: &Circuit, lim: &Limits) -> Outcome {
    if let IdentityVerdict::NonZero(cert) = path_identity_test(c)? {
        let attach = envelope("certificate", &CertificateDto::from_certificate(&cert));
        return Err(Failure::Rejected(
            "not an identity (certificate attached)".into(),
            Some(attach),
        ));
    }
    if !is_simple(c) {
        return Err(Failure::Rejected(
            "not simple: the terms share a common factor".into(),
            None,
        ));
    }
    if let Some(s) = vanishing_subset(c, lim)? {
        let idx: Vec<String> = s.iter().map(|i| i.to_string()).collect();
        return Err(Failure::Rejected(
            format!("not minimal: vanishing proper subset {{{}}}", idx.join(",")),
            None,
        ));
    }
    Ok(())
}

fn cmd_nucleus(file: &FsPath, stage: StageArg, indep: Option<&[usize]>, json: bool) -> Outcome {
    let c = load_circuit(file)?;
    let lim = Limits::default();
    diagnose(&c, &lim)?;
    let report = match stage {
        StageArg::Mat => build_mat_nucleus(&c, &lim)?,
        StageArg::Full => build_nucleus(&c, indep, &lim)?,
    };
    let ok = nucleus_identity(&c, &report)?.expand(lim.max_monomials)?.is_zero();
    let bounds = verify_rank_bounds(&c, &lim)?;
    let dto = NucleusDto::new(&report, ok, Some(&bounds));
    if json {
        println!("{}", render("nucleus", &dto));
        return Ok(());
    }
    println!("stage: {}", dto.stage);
    println!("rank(K) = {}", dto.rank);
    for v in &dto.k_basis {
        println!("  K basis {}", point_str(v));
    }
    for m in &dto.matchings {
        println!(
            "  T_1 <-> T_{}: scale {}, {} outside pairs",
            m.term + 1,
            m.scale,
            m.outside.len()
        );
    }
    println!("independent terms: {:?}", dto.independent);
    println!("nucleus coefficients: {}", dto.alphas.join(", "));
    println!("nucleus identity expands to zero: {ok}");
    for e in &bounds.entries {
        let op = if e.strict { "<" } else { "<=" };
        let mark = if e.pass { "pass" } else { "FAIL" };
        println!("  {:<36} {} {op} {}  {mark}", e.name, e.measured, e.bound);
    }
    Ok(())
}

fn cmd_sg(file: &FsPath, k: usize, op: SgOp, cap: u128, json: bool) -> Outcome {
    let s = SgConfig::parse(&read(file)?)?;
    let dto = match op {
        SgOp::Closed | SgOp::Operator => {
            let out = sg_operator(&s, k, cap)?;
            SgDto::outcome(if op == SgOp::Closed { "closed" } else { "operator" }, &s, k, &out)
        }
        SgOp::Growth => SgDto::growth(&sg_growth_check(&s, k, cap)?),
    };
    if json {
        println!("{}", render("sg", &dto));
        return Ok(());
    }
    println!("size {}, rank {}", dto.size, dto.rank);
    match op {
        SgOp::Closed => println!("{}", dto.closed.unwrap()),
        SgOp::Operator => match &dto.witness_vectors {
            None => println!("Closed"),
            Some(w) => {
                let vs: Vec<String> = w.iter().map(|v| point_str(v)).collect();
                println!("Witness {}", vs.join(" "));
            }
        },
        SgOp::Growth => {
            let closed = dto.closed.map_or("unknown".to_string(), |b| b.to_string());
            println!("closed: {closed}");
            match dto.satisfied {
                None => println!("regime: below threshold"),
                Some(b) => println!("regime: checked, |S| >= 2^(r/9k) = {:.3}: {b}", dto.bound.unwrap()),
            }
        }
    }
    Ok(())
}

fn cmd_gen(family: Family, output: Option<&FsPath>, field: &str) -> Outcome {
    let field: FieldSpec = field.parse()?;
    let text = match family {
        Family::Interp { k } => write_circuit(&gen_interpolation_identity(k, field)?),
        Family::Random { k, d, n, seed } => write_circuit(&gen_random(k, d, n, field, seed)?),
        Family::Line => gen_line().to_text(),
        Family::SkewLines => gen_skew_lines().to_text(),
        Family::Fp { k, r, p } => gen_fp_config(k, r, p)?.to_text(),
    };
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_bench(json: bool) -> Outcome {
    let q = FieldSpec::Rational;
    let lim = Limits::default();
    let mut cases: Vec<Value> = Vec::new();
    let mut time = |name: String, f: &mut dyn FnMut() -> Result<String, Error>| -> Outcome {
        let t = Instant::now();
        let verdict = f()?;
        let millis = t.elapsed().as_secs_f64() * 1e3;
        cases.push(json!({ "name": name, "millis": millis, "verdict": verdict }));
        Ok(())
    };
    for k in 3..=5 {
        let c = gen_interpolation_identity(k, q)?;
        time(format!("path test, interp k={k}"), &mut || {
            Ok(if path_identity_test(&c)?.is_zero() {
                "ZERO"
            } else {
                "NONZERO"
            }
            .into())
        })?;
        time(format!("nucleus, interp k={k}"), &mut || {
            Ok(format!("rank {}", build_nucleus(&c, None, &lim)?.k.rank()))
        })?;
    }
    let r = gen_random(4, 4, 4, q, 1)?;
    time("path test, random k=4 d=4 n=4".into(), &mut || {
        Ok(if path_identity_test(&r)?.is_zero() {
            "ZERO"
        } else {
            "NONZERO"
        }
        .into())
    })?;
    let fp = gen_fp_config(3, 2, 3)?;
    time("SG_3 operator, fp(3,2,3)".into(), &mut || {
        Ok(format!("{:?}", sg_operator(&fp, 3, DEFAULT_SUBSET_CAP)?))
    })?;
    let z = gen_interpolation_identity(3, q)?;
    time("hitting set k=2 d=3 n=3".into(), &mut || {
        let h = hitting_set(2, 3, 3, q)?;
        Ok(format!(
            "{} points, zero: {}",
            h.len(),
            h.points.iter().all(|p| z.evaluate(&p[..2]).is_zero())
        ))
    })?;
    if json {
        println!("{}", render("bench", &json!({ "cases": cases })));
    } else {
        for c in &cases {
            println!(
                "{:<36} {:>10.2} ms  {}",
                c["name"].as_str().unwrap(),
                c["millis"].as_f64().unwrap(),
                c["verdict"].as_str().unwrap()
            );
        }
    }
    Ok(())
}

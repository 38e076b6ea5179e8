//! Identity testers: hitting sets, black-box evaluation, random evaluation.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{grid_points, Circuit};
use crate::error::{input, resource, Error, Result};
use crate::field::{FieldSpec, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankBound {
    pub k: usize,
    pub d: usize,
    pub field: FieldSpec,
    pub value: usize,
}

/// `3k^2` over the rationals, `ceil(3k^2 lg 2d)` otherwise.
pub fn rank_bound(k: usize, d: usize, field: FieldSpec) -> Result<RankBound> {
    if k < 2 {
        return input("rank bounds need k >= 2");
    }
    if d < 1 {
        return input("degree must be positive");
    }
    let e = 3 * k * k;
    let value = if field.is_rational() {
        e
    } else {
        ceil_log2_pow(2 * d, e)
    };
    Ok(RankBound { k, d, field, value })
}

/// `ceil(e * lg b)`, exactly.
pub fn ceil_log2_pow(b: usize, e: usize) -> usize {
    let x = BigUint::from(b).pow(e as u32);
    if x.is_one() {
        0
    } else {
        (x - 1u8).bits() as usize
    }
}

fn bits(x: u128) -> u64 {
    (128 - x.leading_zeros()) as u64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HittingMode {
    /// All of `{0..d}^n`.
    Grid,
    /// `x_i = sum_j alpha^{ij} y_j` over `alpha in {1..a_size}`, `y in {0..d}^{width}`.
    Condenser { a_size: u64, width: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingSet {
    pub field: FieldSpec,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    /// `None` for `k = 1`.
    pub rank: Option<RankBound>,
    /// The rank actually used; differs from `rank` only under an override.
    pub effective_rank: usize,
    pub mode: HittingMode,
    pub points: Vec<Vec<Scalar>>,
    /// Bound on the bit-length of any coordinate.
    pub bit_bound: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct HittingOptions {
    pub cap: u128,
    /// Replaces the rank bound. Intended for tests at desk scale only.
    pub rank_override: Option<usize>,
}

pub const DEFAULT_POINT_CAP: u128 = 2_000_000;

impl Default for HittingOptions {
    fn default() -> Self {
        HittingOptions {
            cap: DEFAULT_POINT_CAP,
            rank_override: None,
        }
    }
}

pub fn hitting_set(k: usize, d: usize, n: usize, field: FieldSpec) -> Result<HittingSet> {
    hitting_set_with(k, d, n, field, &HittingOptions::default())
}

pub fn hitting_set_with(k: usize, d: usize, n: usize, field: FieldSpec, opt: &HittingOptions) -> Result<HittingSet> {
    if k == 0 || n == 0 {
        return input("k and n must be positive");
    }
    if d == 0 {
        return input("degree must be positive");
    }
    let rank = if k == 1 { None } else { Some(rank_bound(k, d, field)?) };
    let r = opt.rank_override.unwrap_or(rank.map_or(0, |b| b.value));
    if let Some(p) = field.size() {
        if p <= d as u64 {
            return input(format!("F_{p} has no grid {{0..{d}}}; need p > {d}"));
        }
    }
    let side = d as u128 + 1;
    if n <= r + 1 {
        let size = side.checked_pow(n as u32).filter(|&s| s <= opt.cap);
        if size.is_none() {
            return resource(format!(
                "grid of (d+1)^n = {}^{n} points exceeds the cap {}",
                d + 1,
                opt.cap
            ));
        }
        let points: Vec<Vec<Scalar>> = grid_points(field, n, d).collect();
        let bit_bound = match field.size() {
            Some(p) => bits(p as u128 - 1),
            None => bits(d as u128),
        };
        return Ok(HittingSet {
            field,
            k,
            d,
            n,
            rank,
            effective_rank: r,
            mode: HittingMode::Grid,
            points,
            bit_bound,
        });
    }
    let width = r + 1;
    let a_size = 2 * (n as u128) * (d as u128) * (width as u128) + 1;
    if let Some(p) = field.size() {
        if p as u128 <= a_size {
            return input(format!(
                "condenser needs {a_size} distinct nonzero values; need p > {a_size}"
            ));
        }
    }
    let total = side
        .checked_pow(width as u32)
        .and_then(|g| g.checked_mul(a_size))
        .filter(|&s| s <= opt.cap);
    if total.is_none() {
        return resource(format!(
            "(d+1)^(R+1) * |A| = {}^{width} * {a_size} points exceeds the cap {}",
            d + 1,
            opt.cap
        ));
    }
    let mut points = Vec::new();
    for alpha in 1..=a_size as u64 {
        // cols[j][i] = alpha^{(i+1)(j+1)}
        let a = field.int(alpha as i64);
        let base: Vec<Scalar> = (1..=n).map(|i| a.pow(i as u32)).collect();
        let mut pw: Vec<Scalar> = base.clone();
        let mut cols = Vec::with_capacity(width);
        for _ in 0..width {
            cols.push(pw.clone());
            pw = pw.iter().zip(&base).map(|(x, b)| x * b).collect();
        }
        for g in grid_points(field, width, d) {
            let mut pt = vec![field.zero(); n];
            for (j, gj) in g.iter().enumerate() {
                if gj.is_zero() {
                    continue;
                }
                for i in 0..n {
                    pt[i] += &(&cols[j][i] * gj);
                }
            }
            points.push(pt);
        }
    }
    let bit_bound = match field.size() {
        Some(p) => bits(p as u128 - 1),
        None => bits(width as u128 * d as u128) + (n * width) as u64 * bits(a_size),
    };
    Ok(HittingSet {
        field,
        k,
        d,
        n,
        rank,
        effective_rank: r,
        mode: HittingMode::Condenser {
            a_size: a_size as u64,
            width,
        },
        points,
        bit_bound,
    })
}

impl HittingSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_bits(&self) -> u64 {
        self.points.iter().flatten().map(Scalar::bit_length).max().unwrap_or(0)
    }

    pub fn within_bit_bound(&self) -> bool {
        self.max_bits() <= self.bit_bound
    }

    pub fn to_text(&self) -> String {
        self.points.iter().map(|p| point_line(p) + "\n").collect()
    }
}

pub fn point_line(p: &[Scalar]) -> String {
    let v: Vec<String> = p.iter().map(|s| s.to_string()).collect();
    format!("point [{}]", v.join(","))
}

/// Reads `point [..]` lines.
pub fn parse_points(field: FieldSpec, src: &str) -> Result<Vec<Vec<Scalar>>> {
    let mut out = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: &str| Error::Parse {
            line: i + 1,
            column: 1,
            message: m.to_string(),
        };
        let inner = line
            .strip_prefix("point")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('['))
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad("expected `point [..]`"))?;
        let coords = inner
            .split(',')
            .map(|s| field.parse_scalar(s.trim()))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(&e.to_string()))?;
        out.push(coords);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlackboxVerdict {
    Zero,
    NonZero(Vec<Scalar>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlackboxOutcome {
    pub verdict: BlackboxVerdict,
    pub evaluations: usize,
    pub warning: Option<String>,
}

/// First point of `h` where the oracle is nonzero.
pub fn blackbox_test<F>(mut eval: F, h: &HittingSet) -> Result<BlackboxOutcome>
where
    F: FnMut(&[Scalar]) -> Result<Scalar>,
{
    let warning = h.is_empty().then(|| "empty hitting set; ZERO is vacuous".to_string());
    for (i, p) in h.points.iter().enumerate() {
        if !eval(p)?.is_zero() {
            return Ok(BlackboxOutcome {
                verdict: BlackboxVerdict::NonZero(p.clone()),
                evaluations: i + 1,
                warning,
            });
        }
    }
    Ok(BlackboxOutcome {
        verdict: BlackboxVerdict::Zero,
        evaluations: h.len(),
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RandomVerdict {
    ProbablyZero,
    NonZero(Vec<Scalar>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomOutcome {
    pub verdict: RandomVerdict,
    pub trials_run: usize,
    pub sample_size: u64,
    /// `d / S`, the chance a single trial misses a nonzero circuit.
    pub per_trial_error: f64,
    pub warning: Option<String>,
}

pub fn schwartz_zippel_test(c: &Circuit, trials: usize, seed: u64) -> RandomOutcome {
    let d = c.degree();
    let (sample_size, warning) = match c.field.size() {
        Some(p) => (
            p,
            (p <= d as u64).then(|| format!("p = {p} <= d = {d}; the error bound is vacuous")),
        ),
        None => ((2 * d).max(100) as u64 + 1, None),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_trial_error = (d as f64 / sample_size as f64).min(1.0);
    for t in 0..trials {
        let pt: Vec<Scalar> = (0..c.nvars)
            .map(|_| c.field.int(rng.gen_range(0..sample_size) as i64))
            .collect();
        if !c.evaluate(&pt).is_zero() {
            return RandomOutcome {
                verdict: RandomVerdict::NonZero(pt),
                trials_run: t + 1,
                sample_size,
                per_trial_error,
                warning,
            };
        }
    }
    RandomOutcome {
        verdict: RandomVerdict::ProbablyZero,
        trials_run: trials,
        sample_size,
        per_trial_error,
        warning,
    }
}

/// Parses an oracle answer: `n`, `n/d` or a finite decimal such as `-1.25`.
pub fn parse_answer(field: FieldSpec, s: &str) -> Result<Scalar> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) {
            let num: BigInt = format!("{int}{frac}")
                .parse()
                .map_err(|_| Error::Input(format!("malformed answer `{s}`")))?;
            let den = BigInt::from(10u8).pow(frac.len() as u32);
            return field.ratio(&num, &den);
        }
    }
    field.parse_scalar(s)
}

/// An external evaluator: one `point [..]` line in, one scalar line out.
pub struct SubprocessOracle {
    field: FieldSpec,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl SubprocessOracle {
    pub fn spawn(field: FieldSpec, program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Input(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(SubprocessOracle {
            field,
            child,
            stdin,
            stdout,
        })
    }

    pub fn eval(&mut self, p: &[Scalar]) -> Result<Scalar> {
        let io = |e: std::io::Error| Error::Input(format!("oracle i/o: {e}"));
        writeln!(self.stdin, "{}", point_line(p)).map_err(io)?;
        self.stdin.flush().map_err(io)?;
        let mut line = String::new();
        if self.stdout.read_line(&mut line).map_err(io)? == 0 {
            return input("oracle closed its output");
        }
        parse_answer(self.field, &line)
    }
}

impl Drop for SubprocessOracle {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_interpolation_identity, MultTerm};
    use crate::linalg::FormVec;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(rank_bound(2, 5, q()).unwrap().value, 12);
        let f2 = FieldSpec::prime(2).unwrap();
        assert_eq!(rank_bound(3, 4, f2).unwrap().value, 81);
        let f3 = FieldSpec::prime(3).unwrap();
        assert_eq!(rank_bound(2, 1, f3).unwrap().value, 12);
        assert!(rank_bound(1, 1, q()).is_err());
        // ceil(12 lg 6) = ceil(31.02) = 32
        assert_eq!(rank_bound(2, 3, f3).unwrap().value, 32);
    }

    fn x2_plus_xy() -> Circuit {
        let t1 = MultTerm::monic(q(), vec![FormVec::from_ints(q(), &[1, 0]); 2]);
        let t2 = MultTerm::monic(
            q(),
            vec![FormVec::from_ints(q(), &[1, 0]), FormVec::from_ints(q(), &[0, 1])],
        );
        Circuit::new(q(), 2, vec![t1, t2]).unwrap()
    }

    #[test]
    fn grid_distinguishes() {
        let h = hitting_set(2, 2, 2, q()).unwrap();
        assert_eq!(h.mode, HittingMode::Grid);
        assert_eq!(h.len(), 9);
        let c = x2_plus_xy();
        let out = blackbox_test(|p| Ok(c.evaluate(p)), &h).unwrap();
        assert!(matches!(out.verdict, BlackboxVerdict::NonZero(_)));
        let z = gen_interpolation_identity(4, q()).unwrap();
        let hz = hitting_set(4, z.degree(), 2, q()).unwrap();
        assert_eq!(
            blackbox_test(|p| Ok(z.evaluate(p)), &hz).unwrap().verdict,
            BlackboxVerdict::Zero
        );
        assert!(h.within_bit_bound());
    }

    #[test]
    fn condenser_with_small_rank() {
        let opt = HittingOptions {
            rank_override: Some(1),
            ..Default::default()
        };
        let h = hitting_set_with(2, 2, 4, q(), &opt).unwrap();
        assert_eq!(h.mode, HittingMode::Condenser { a_size: 33, width: 2 });
        assert_eq!(h.len(), 9 * 33);
        assert!(h.within_bit_bound());
        // (x1 - x2)(x3 - x4) needs rank 2 after substitution
        let f = |v: &[i64]| FormVec::from_ints(q(), v);
        let c = Circuit::new(
            q(),
            4,
            vec![MultTerm::monic(q(), vec![f(&[1, -1, 0, 0]), f(&[0, 0, 1, -1])])],
        )
        .unwrap();
        assert!(matches!(
            blackbox_test(|p| Ok(c.evaluate(p)), &h).unwrap().verdict,
            BlackboxVerdict::NonZero(_)
        ));
    }

    #[test]
    fn guards() {
        assert!(matches!(hitting_set(2, 2, 20, q()), Err(Error::Resource(_))));
        let f5 = FieldSpec::prime(5).unwrap();
        let opt = HittingOptions {
            rank_override: Some(1),
            ..Default::default()
        };
        assert!(matches!(hitting_set_with(2, 2, 4, f5, &opt), Err(Error::Input(_))));
        let f2 = FieldSpec::prime(2).unwrap();
        assert!(matches!(hitting_set(2, 2, 2, f2), Err(Error::Input(_))));
    }

    #[test]
    fn single_term() {
        let f = FormVec::from_ints(q(), &[1]);
        let c = Circuit::new(q(), 1, vec![MultTerm::monic(q(), vec![f; 3])]).unwrap();
        let h = hitting_set(1, 3, 1, q()).unwrap();
        let out = blackbox_test(|p| Ok(c.evaluate(p)), &h).unwrap();
        assert_eq!(out.verdict, BlackboxVerdict::NonZero(vec![q().int(1)]));
    }

    #[test]
    fn blackbox_edge_cases() {
        let h = hitting_set(2, 1, 2, q()).unwrap();
        assert_eq!(
            blackbox_test(|_| Ok(q().zero()), &h).unwrap().verdict,
            BlackboxVerdict::Zero
        );
        let mut e = h.clone();
        e.points.clear();
        let out = blackbox_test(|_| Ok(q().one()), &e).unwrap();
        assert_eq!(out.verdict, BlackboxVerdict::Zero);
        assert!(out.warning.is_some());
        assert!(blackbox_test(|_| input("boom"), &h).is_err());
    }

    #[test]
    fn random_tester() {
        let z = gen_interpolation_identity(4, q()).unwrap();
        assert_eq!(schwartz_zippel_test(&z, 50, 1).verdict, RandomVerdict::ProbablyZero);
        let f = |v: &[i64]| FormVec::from_ints(q(), v);
        let c = Circuit::new(q(), 2, vec![MultTerm::monic(q(), vec![f(&[1, -1])])]).unwrap();
        let a = schwartz_zippel_test(&c, 10, 7);
        assert_eq!(a, schwartz_zippel_test(&c, 10, 7));
        assert!(matches!(a.verdict, RandomVerdict::NonZero(_)));
        let f2 = FieldSpec::prime(2).unwrap();
        let g = |v: &[i64]| FormVec::from_ints(f2, v);
        let c2 = Circuit::new(f2, 2, vec![MultTerm::monic(f2, vec![g(&[1, 0]); 3])]).unwrap();
        assert!(schwartz_zippel_test(&c2, 5, 0).warning.is_some());
    }

    #[test]
    fn points_round_trip() {
        let h = hitting_set(2, 2, 3, q()).unwrap();
        assert_eq!(parse_points(q(), &h.to_text()).unwrap(), h.points);
        assert!(parse_points(q(), "pt [1]").is_err());
    }

    #[test]
    fn answers() {
        assert_eq!(parse_answer(q(), "-1.25").unwrap(), q().parse_scalar("-5/4").unwrap());
        assert_eq!(parse_answer(q(), " 3/6\n").unwrap(), q().parse_scalar("1/2").unwrap());
        assert!(parse_answer(q(), "x").is_err());
    }

    #[test]
    fn subprocess_oracle() {
        let script = "while read l; do echo 0; done".to_string();
        let mut o = SubprocessOracle::spawn(q(), "sh", &["-c".into(), script]).unwrap();
        let h = hitting_set(2, 1, 2, q()).unwrap();
        assert_eq!(blackbox_test(|p| o.eval(p), &h).unwrap().verdict, BlackboxVerdict::Zero);
    }
}

//! JSON reports, schema `sps-lab/1`.
//!
//! Scalars are strings (`"-3/4"`, or a residue over `F_p`) so that values of
//! any size survive the trip. Every report is wrapped as
//! `{"schema": "sps-lab/1", "kind": .., "report": ..}`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{RankReport, SplitCheck};
use crate::chain::{elems, Partition};
use crate::circuit::{Circuit, MultTerm};
use crate::error::{input, Result};
use crate::field::{FieldSpec, Scalar};
use crate::ideal::{radspan_of, TermIdeal};
use crate::linalg::{FormVec, Subspace};
use crate::nucleus::{scaling_factor, NucleusReport, Stage, TermMatching};
use crate::path::{Certificate, Path};
use crate::pit::{HittingMode, HittingSet};
use crate::sg::{GrowthRegime, GrowthReport, SgConfig, SgOutcome};

pub const SCHEMA_ID: &str = "sps-lab/1";

/// JSON Schema for every report kind.
pub const SCHEMA: &str = include_str!("../schema/sps-lab-1.schema.json");

pub fn envelope<T: Serialize>(kind: &str, report: &T) -> Value {
    json!({ "schema": SCHEMA_ID, "kind": kind, "report": report })
}

/// Pretty-printed envelope.
pub fn render<T: Serialize>(kind: &str, report: &T) -> String {
    serde_json::to_string_pretty(&envelope(kind, report)).expect("reports serialize")
}

fn scalars(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_string).collect()
}

pub fn form_dto(v: &FormVec) -> Vec<String> {
    scalars(&v.0)
}

fn parse_form(field: FieldSpec, v: &[String]) -> Result<FormVec> {
    Ok(FormVec(v.iter().map(|s| field.parse_scalar(s)).collect::<Result<_>>()?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDto {
    pub form: Vec<String>,
    pub mult: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDto {
    pub coeff: String,
    pub factors: Vec<FactorDto>,
}

impl TermDto {
    pub fn from_term(t: &MultTerm) -> Self {
        let mut factors: Vec<FactorDto> = Vec::new();
        for f in &t.forms {
            let form = form_dto(f);
            match factors.iter_mut().find(|x| x.form == form) {
                Some(x) => x.mult += 1,
                None => factors.push(FactorDto { form, mult: 1 }),
            }
        }
        TermDto {
            coeff: t.coeff.to_string(),
            factors,
        }
    }

    pub fn to_term(&self, field: FieldSpec, n: usize) -> Result<MultTerm> {
        let mut forms = Vec::new();
        for f in &self.factors {
            let v = parse_form(field, &f.form)?;
            if v.len() != n {
                return input(format!("form with {} entries, expected {n}", v.len()));
            }
            forms.extend(std::iter::repeat_n(v, f.mult));
        }
        MultTerm::new(field.parse_scalar(&self.coeff)?, forms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDto {
    pub field: String,
    pub nvars: usize,
    pub terms: Vec<TermDto>,
}

impl CircuitDto {
    pub fn from_circuit(c: &Circuit) -> Self {
        CircuitDto {
            field: c.field.to_string(),
            nvars: c.nvars,
            terms: c.terms.iter().map(TermDto::from_term).collect(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        let field: FieldSpec = self.field.parse()?;
        let terms = self
            .terms
            .iter()
            .map(|t| t.to_term(field, self.nvars))
            .collect::<Result<_>>()?;
        Circuit::new(field, self.nvars, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathNodeDto {
    /// Index of the term the node divides.
    pub source: usize,
    pub node: TermDto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDto {
    /// Prefix length; the surviving term has this zero-based index.
    pub i: usize,
    pub alpha: String,
    pub path: Vec<PathNodeDto>,
}

impl CertificateDto {
    pub fn from_certificate(cert: &Certificate) -> Self {
        let p = cert.path();
        CertificateDto {
            i: cert.i(),
            alpha: cert.alpha().to_string(),
            path: p
                .sources
                .iter()
                .zip(&p.nodes)
                .map(|(&source, t)| PathNodeDto {
                    source,
                    node: TermDto::from_term(t),
                })
                .collect(),
        }
    }

    /// Rebuilds the certificate for `c`; whether it is valid is a separate
    /// question for `verify_certificate`.
    pub fn to_certificate(&self, c: &Circuit) -> Result<Certificate> {
        let base = TermIdeal::zero(c.field, c.nvars);
        let nodes: Vec<MultTerm> = self
            .path
            .iter()
            .map(|p| p.node.to_term(c.field, c.nvars))
            .collect::<Result<_>>()?;
        let path = Path {
            radspan: radspan_of(c.field, c.nvars, &nodes),
            base,
            sources: self.path.iter().map(|p| p.source).collect(),
            nodes,
        };
        Certificate::new(self.i, path, c.field.parse_scalar(&self.alpha)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDto {
    pub method: String,
    /// `ZERO`, `NONZERO` or `PROBABLY_ZERO`.
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckDto {
    /// Absent when the circuit is an external evaluator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitDto>,
    pub results: Vec<MethodDto>,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingDto {
    pub term: usize,
    /// `(position in T_1, position in T_i)` for forms inside `K`.
    pub inside: Vec<(usize, usize)>,
    pub outside: Vec<(usize, usize)>,
    pub outside_scales: Vec<String>,
    pub scale: String,
}

impl MatchingDto {
    fn new(term: usize, m: &TermMatching) -> Self {
        MatchingDto {
            term,
            inside: m.inside.pairs.clone(),
            outside: m.outside.pairs.clone(),
            outside_scales: scalars(&m.outside.scales),
            scale: scaling_factor(&m.outside).to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundDto {
    pub name: String,
    pub bound: usize,
    pub measured: usize,
    pub strict: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankDto {
    pub rank: usize,
    pub nucleus_rank: usize,
    pub non_nucleus_rank: usize,
    pub ind_fanin: usize,
    pub entries: Vec<BoundDto>,
}

impl RankDto {
    pub fn new(r: &RankReport) -> Self {
        RankDto {
            rank: r.rank,
            nucleus_rank: r.nucleus_rank,
            non_nucleus_rank: r.non_nucleus_rank,
            ind_fanin: r.ind_fanin,
            entries: r
                .entries
                .iter()
                .map(|e| BoundDto {
                    name: e.name.clone(),
                    bound: e.bound,
                    measured: e.measured,
                    strict: e.strict,
                    pass: e.pass,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NucleusDto {
    pub stage: String,
    pub k_basis: Vec<Vec<String>>,
    pub rank: usize,
    pub matchings: Vec<MatchingDto>,
    pub k_terms: Vec<TermDto>,
    pub alphas: Vec<String>,
    pub independent: Vec<usize>,
    pub identity_expands_to_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<RankDto>,
}

impl NucleusDto {
    pub fn new(r: &NucleusReport, identity_ok: bool, bounds: Option<&RankReport>) -> Self {
        NucleusDto {
            stage: match r.stage {
                Stage::MatNucleus => "mat",
                Stage::Nucleus => "full",
            }
            .into(),
            k_basis: subspace_dto(&r.k),
            rank: r.k.rank(),
            matchings: r
                .matchings
                .iter()
                .enumerate()
                .map(|(i, m)| MatchingDto::new(i, m))
                .collect(),
            k_terms: r.k_terms.iter().map(TermDto::from_term).collect(),
            alphas: scalars(&r.alphas),
            independent: r.independent.clone(),
            identity_expands_to_zero: identity_ok,
            bounds: bounds.map(RankDto::new),
        }
    }
}

pub fn subspace_dto(s: &Subspace) -> Vec<Vec<String>> {
    s.basis().iter().map(form_dto).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgDto {
    pub op: String,
    pub k: usize,
    pub size: usize,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    /// Indices and vectors of the witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_vectors: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl SgDto {
    pub fn outcome(op: &str, s: &SgConfig, k: usize, out: &SgOutcome) -> Self {
        let (closed, witness) = match out {
            SgOutcome::Closed => (true, None),
            SgOutcome::Witness(w) => (false, Some(w.clone())),
        };
        SgDto {
            op: op.into(),
            k,
            size: s.len(),
            rank: s.rank(),
            closed: Some(closed),
            witness_vectors: witness
                .as_ref()
                .map(|w| w.iter().map(|&i| form_dto(&s.vectors()[i])).collect()),
            witness,
            regime: None,
            satisfied: None,
            bound: None,
        }
    }

    pub fn growth(g: &GrowthReport) -> Self {
        let (regime, satisfied) = match g.regime {
            GrowthRegime::BelowThreshold => ("below threshold", None),
            GrowthRegime::Checked { satisfied } => ("checked", Some(satisfied)),
        };
        SgDto {
            op: "growth".into(),
            k: g.k,
            size: g.size,
            rank: g.rank,
            closed: g.closed,
            witness: None,
            witness_vectors: None,
            regime: Some(regime.into()),
            satisfied,
            bound: Some(g.bound()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingSetDto {
    pub field: String,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_bound: Option<usize>,
    pub effective_rank: usize,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_size: Option<u64>,
    pub bit_bound: u64,
    pub max_bits: u64,
    pub size: usize,
    pub points: Vec<Vec<String>>,
    pub note: String,
}

impl HittingSetDto {
    pub fn new(h: &HittingSet) -> Self {
        let (mode, a_size) = match h.mode {
            HittingMode::Grid => ("grid", None),
            HittingMode::Condenser { a_size, .. } => ("condenser", Some(a_size)),
        };
        HittingSetDto {
            field: h.field.to_string(),
            k: h.k,
            d: h.d,
            n: h.n,
            rank_bound: h.rank.map(|r| r.value),
            effective_rank: h.effective_rank,
            mode: mode.into(),
            a_size,
            bit_bound: h.bit_bound,
            max_bits: h.max_bits(),
            size: h.len(),
            points: h.points.iter().map(|p| scalars(p)).collect(),
            note: "size and bit-length constants are this implementation's own".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDto {
    pub vacuous: bool,
    pub holds: bool,
    pub tuple: Vec<Vec<String>>,
    pub partitions: Vec<Vec<Vec<usize>>>,
}

impl SplitDto {
    pub fn new(s: &SplitCheck) -> Self {
        let part = |p: &Partition| p.classes().iter().map(|&c| elems(c)).collect();
        SplitDto {
            vacuous: s.vacuous,
            holds: s.holds(),
            tuple: s.tuple.iter().map(form_dto).collect(),
            partitions: s.parts.iter().map(part).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_interpolation_identity, gen_random};
    use crate::path::{path_identity_test, verify_certificate, IdentityVerdict};

    #[test]
    fn circuit_round_trip() {
        let f7 = FieldSpec::prime(7).unwrap();
        for c in [
            gen_interpolation_identity(4, FieldSpec::Rational).unwrap(),
            gen_random(3, 2, 3, f7, 5).unwrap(),
        ] {
            let dto = CircuitDto::from_circuit(&c);
            let back: CircuitDto = serde_json::from_str(&serde_json::to_string(&dto).unwrap()).unwrap();
            let c2 = back.to_circuit().unwrap();
            assert_eq!(c2.expand(1 << 16).unwrap(), c.expand(1 << 16).unwrap());
        }
        let dto = CircuitDto::from_circuit(&gen_interpolation_identity(3, FieldSpec::Rational).unwrap());
        assert_eq!(dto.terms[0].factors[0].mult, 1);
    }

    #[test]
    fn certificate_round_trip() {
        let c = gen_random(3, 2, 2, FieldSpec::Rational, 3).unwrap();
        let IdentityVerdict::NonZero(cert) = path_identity_test(&c).unwrap() else {
            panic!("random circuit is nonzero")
        };
        let dto = CertificateDto::from_certificate(&cert);
        let back = dto.to_certificate(&c).unwrap();
        assert!(verify_certificate(&c, &back).unwrap().is_valid());
        let v = envelope("certificate", &dto);
        assert_eq!(v["schema"], SCHEMA_ID);
    }

    #[test]
    fn schema_is_json() {
        let v: Value = serde_json::from_str(SCHEMA).unwrap();
        assert!(v["$defs"].is_object());
    }
}

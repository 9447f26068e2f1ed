//! JSON scenario documents.
//!
//! ```json
//! {
//!   "model": "markovian-classicality",
//!   "seed": 7,
//!   "S":  {"dims": [2], "state": {"ket": [[1,0],[0,0]]}, "hamiltonian": [{"coeff": 0.5, "ops": [[0, "sx"]]}]},
//!   "Sp": {"dims": [2], "state": {"basis": 1},
//!          "hamiltonian": [{"coeff": 1.0, "ops": [[0, "sz"]]}],
//!          "jumps": [{"rate": 0.3, "ops": [[0, "lower"]]}]},
//!   "time": {"start": 0, "stop": 30, "points": 200}
//! }
//! ```
//!
//! The `disd` model takes `dims` for S, S′ and E, couplings `c` and `C`,
//! local terms `H_S`, `H_Sp`, `H_E`, interaction shapes `H_SpE` (factors
//! 0 = S′, 1 = E) and `H_SSp` (0 = S, 1 = S′), and kets `psi_S`, `p`, `chi`.
//! Operators are library names (see [`crate::operators::NAMES`]) or
//! `{"matrix": [[[re, im], ...], ...]}`.

use serde::Deserialize;

use crate::dynamics::{DisdScenario, HamiltonianSpec, HamiltonianTerm, Jump, LindbladSpec, MarkovianScenario, TimeGrid};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron_all, outer, CMatrix, CVector};
use crate::matrix_json::{json_error, pairs_to_vector, rows_to_matrix, Pair};
use crate::operators::named;
use crate::state::{DensityOperator, HilbertFactorization, PureState};

pub const MODELS: [&str; 2] = ["markovian-classicality", "disd"];

#[derive(Debug, Clone)]
pub enum Scenario {
    Markovian(MarkovianScenario),
    Disd(DisdScenario),
}

#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub seed: Option<u64>,
    pub scenario: Scenario,
}

impl ScenarioFile {
    pub fn model(&self) -> &'static str {
        match self.scenario {
            Scenario::Markovian(_) => MODELS[0],
            Scenario::Disd(_) => MODELS[1],
        }
    }

    /// Replace the time grid by `points` samples over the same window.
    pub fn with_points(mut self, points: usize) -> Result<Self> {
        let grid = match &mut self.scenario {
            Scenario::Markovian(s) => &mut s.grid,
            Scenario::Disd(s) => &mut s.grid,
        };
        *grid = TimeGrid::linspace(grid.start(), grid.stop(), points)?;
        Ok(self)
    }
}

#[derive(Deserialize)]
struct Header {
    model: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OpDoc {
    Name(String),
    Matrix { matrix: Vec<Vec<Pair>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    coeff: f64,
    ops: Vec<(usize, OpDoc)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JumpDoc {
    rate: f64,
    ops: Vec<(usize, OpDoc)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum StateDoc {
    Ket(Vec<Pair>),
    Basis(usize),
    Density(Vec<Vec<Pair>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeDoc {
    #[serde(default)]
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartDoc {
    dims: Vec<usize>,
    state: StateDoc,
    #[serde(default)]
    hamiltonian: Vec<TermDoc>,
    #[serde(default)]
    jumps: Vec<JumpDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkovianDoc {
    #[allow(dead_code)]
    model: String,
    seed: Option<u64>,
    #[serde(rename = "S")]
    s: PartDoc,
    #[serde(rename = "Sp")]
    sp: PartDoc,
    time: Option<TimeDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DisdDoc {
    #[allow(dead_code)]
    model: String,
    seed: Option<u64>,
    dims: [usize; 3],
    c: f64,
    #[serde(rename = "C")]
    big_c: f64,
    #[serde(rename = "H_S", default)]
    h_s: Vec<TermDoc>,
    #[serde(rename = "H_Sp", default)]
    h_sp: Vec<TermDoc>,
    #[serde(rename = "H_E", default)]
    h_e: Vec<TermDoc>,
    #[serde(rename = "H_SpE")]
    h_spe: Vec<TermDoc>,
    #[serde(rename = "H_SSp")]
    h_ssp: Vec<TermDoc>,
    #[serde(rename = "psi_S")]
    psi_s: StateDoc,
    p: StateDoc,
    chi: StateDoc,
    time: Option<TimeDoc>,
}

fn context(what: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::InvalidInput(format!("{what}: {e}"))
}

fn op(doc: &OpDoc, dim: usize) -> Result<CMatrix> {
    match doc {
        OpDoc::Name(name) => named(name, dim),
        OpDoc::Matrix { matrix } => {
            let m = rows_to_matrix(matrix)?;
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
            }
            Ok(m)
        }
    }
}

fn factor_dim(f: &HilbertFactorization, k: usize) -> Result<usize> {
    f.dims()
        .get(k)
        .copied()
        .ok_or_else(|| Error::InvalidSubsystem(format!("factor {k} does not exist ({} factors)", f.len())))
}

fn ops(list: &[(usize, OpDoc)], f: &HilbertFactorization) -> Result<Vec<(usize, CMatrix)>> {
    let mut out: Vec<(usize, CMatrix)> = Vec::with_capacity(list.len());
    for (k, doc) in list {
        if out.iter().any(|(j, _)| j == k) {
            return Err(Error::InvalidInput(format!("factor {k} appears twice in one product")));
        }
        out.push((*k, op(doc, factor_dim(f, *k)?)?));
    }
    Ok(out)
}

fn hamiltonian(terms: &[TermDoc], f: &HilbertFactorization, what: &str) -> Result<HamiltonianSpec> {
    let spec = terms
        .iter()
        .map(|t| Ok(HamiltonianTerm::new(t.coeff, ops(&t.ops, f)?)))
        .collect::<Result<Vec<_>>>()
        .map(HamiltonianSpec::new)
        .map_err(context(what))?;
    spec.validate(f).map_err(context(what))?;
    Ok(spec)
}

fn jump(doc: &JumpDoc, f: &HilbertFactorization) -> Result<Jump> {
    let factors = ops(&doc.ops, f)?;
    let ids: Vec<CMatrix> = f.dims().iter().map(|&d| identity(d)).collect();
    let full = kron_all((0..f.len()).map(|k| factors.iter().find(|(j, _)| *j == k).map_or(&ids[k], |(_, m)| m)));
    Ok(Jump::new(doc.rate, full))
}

fn ket(doc: &StateDoc, dim: usize) -> Result<CVector> {
    match doc {
        StateDoc::Ket(pairs) => {
            let v = pairs_to_vector(pairs)?;
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
            }
            Ok(v)
        }
        StateDoc::Basis(k) if *k < dim => Ok(crate::linalg::basis_vector(dim, *k)),
        StateDoc::Basis(k) => Err(Error::InvalidInput(format!("basis index {k} out of range for dimension {dim}"))),
        StateDoc::Density(_) => Err(Error::InvalidInput("a pure state (ket or basis) is required here".into())),
    }
}

fn density(doc: &StateDoc, f: &HilbertFactorization) -> Result<DensityOperator> {
    match doc {
        StateDoc::Density(rows) => DensityOperator::new(rows_to_matrix(rows)?, f.clone()),
        other => {
            let v = ket(other, f.total_dim())?;
            let psi = PureState::new(v, f.clone())?;
            DensityOperator::new(outer(psi.amplitudes(), psi.amplitudes()), f.clone())
        }
    }
}

fn grid(doc: &Option<TimeDoc>) -> Result<Option<TimeGrid>> {
    doc.as_ref()
        .map(|t| TimeGrid::linspace(t.start, t.stop, t.points))
        .transpose()
        .map_err(context("time"))
}

fn markovian(doc: MarkovianDoc) -> Result<ScenarioFile> {
    let fs = HilbertFactorization::new(doc.s.dims.clone()).map_err(context("S.dims"))?;
    let fsp = HilbertFactorization::new(doc.sp.dims.clone()).map_err(context("Sp.dims"))?;
    if !doc.s.jumps.is_empty() {
        return Err(Error::InvalidInput("S.jumps: the closed system S takes no jump operators".into()));
    }
    let rho_s = density(&doc.s.state, &fs).map_err(context("S.state"))?;
    let rho_sp = density(&doc.sp.state, &fsp).map_err(context("Sp.state"))?;
    let h_s = hamiltonian(&doc.s.hamiltonian, &fs, "S.hamiltonian")?;
    let h_sp = hamiltonian(&doc.sp.hamiltonian, &fsp, "Sp.hamiltonian")?;
    let jumps = doc.sp.jumps.iter().map(|j| jump(j, &fsp)).collect::<Result<Vec<_>>>().map_err(context("Sp.jumps"))?;
    let lindblad = LindbladSpec::new(h_sp, jumps);
    lindblad.validate(&fsp).map_err(context("Sp.jumps"))?;
    let grid = match grid(&doc.time)? {
        Some(g) => g,
        None => MarkovianScenario::default_grid(&lindblad)?,
    };
    Ok(ScenarioFile {
        seed: doc.seed,
        scenario: Scenario::Markovian(MarkovianScenario { rho_s, rho_sp, h_s, lindblad, grid }),
    })
}

fn disd(doc: DisdDoc) -> Result<ScenarioFile> {
    let [ds, dp, de] = doc.dims;
    HilbertFactorization::new(doc.dims.to_vec()).map_err(context("dims"))?;
    let single = |d: usize| HilbertFactorization::new(vec![d]);
    let psi_s = ket(&doc.psi_s, ds).map_err(context("psi_S"))?;
    let p = ket(&doc.p, dp).map_err(context("p"))?;
    let chi = ket(&doc.chi, de).map_err(context("chi"))?;
    let mut scn = DisdScenario::default_qubits(doc.c)?;
    scn.big_c = doc.big_c;
    scn.h_s = hamiltonian(&doc.h_s, &single(ds)?, "H_S")?;
    scn.h_sp = hamiltonian(&doc.h_sp, &single(dp)?, "H_Sp")?;
    scn.h_e = hamiltonian(&doc.h_e, &single(de)?, "H_E")?;
    scn.h_spe = hamiltonian(&doc.h_spe, &HilbertFactorization::new(vec![dp, de])?, "H_SpE")?;
    scn.h_ssp = hamiltonian(&doc.h_ssp, &HilbertFactorization::new(vec![ds, dp])?, "H_SSp")?;
    scn.psi_s = psi_s;
    scn.p = p;
    scn.chi = chi;
    scn.grid = match grid(&doc.time)? {
        Some(g) => g,
        None => {
            let stop = if doc.c > 0.0 { doc.big_c / doc.c } else { doc.big_c / crate::dynamics::DEFAULT_EPSILON };
            TimeGrid::linspace(0.0, stop, 200).map_err(context("time"))?
        }
    };
    Ok(ScenarioFile { seed: doc.seed, scenario: Scenario::Disd(scn) })
}

/// Parse and validate a scenario document. Syntax and schema errors carry
/// the line and column; semantic errors name the offending field.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile> {
    let header: Header = serde_json::from_str(text).map_err(json_error)?;
    match header.model.as_str() {
        "markovian-classicality" => markovian(serde_json::from_str(text).map_err(json_error)?),
        "disd" => disd(serde_json::from_str(text).map_err(json_error)?),
        other => Err(Error::InvalidInput(format!("unknown model '{other}' (expected one of {})", MODELS.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::operators::{lowering, pauli_z};

    const MARKOVIAN: &str = r#"{
        "model": "markovian-classicality",
        "seed": 7,
        "S": {"dims": [2], "state": {"ket": [[0.6,0],[0,0.8]]},
              "hamiltonian": [{"coeff": 0.5, "ops": [[0, "sx"]]}]},
        "Sp": {"dims": [2], "state": {"basis": 1},
               "hamiltonian": [{"coeff": 1.0, "ops": [[0, {"matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}]]}],
               "jumps": [{"rate": 0.25, "ops": [[0, "lower"]]}]},
        "time": {"start": 0, "stop": 8, "points": 9}
    }"#;

    const DISD: &str = r#"{
        "model": "disd",
        "dims": [2, 2, 2],
        "c": 0.01, "C": 1.0,
        "H_S": [{"coeff": 0.3, "ops": [[0, "sz"]]}],
        "H_SpE": [{"coeff": 1.0, "ops": [[0, "sz"], [1, "sz"]]}],
        "H_SSp": [{"coeff": 1.0, "ops": [[0, "sx"], [1, "sx"]]}],
        "psi_S": {"ket": [[0.6,0],[0.8,0]]},
        "p": {"basis": 0},
        "chi": {"basis": 1}
    }"#;

    #[test]
    fn parses_markovian_document() {
        let file = parse_scenario(MARKOVIAN).unwrap();
        assert_eq!(file.seed, Some(7));
        assert_eq!(file.model(), "markovian-classicality");
        let Scenario::Markovian(s) = file.scenario else { panic!("wrong model") };
        assert_eq!(s.grid.times(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(s.lindblad.jumps.len(), 1);
        assert!(max_abs_diff(&s.lindblad.jumps[0].op, &lowering(2)) == 0.0);
        let h = s.lindblad.hamiltonian.assemble(s.rho_sp.factorization()).unwrap();
        assert!(max_abs_diff(&h, &pauli_z()) == 0.0);
        assert!((s.rho_s.matrix()[(1, 1)].re - 0.64).abs() < 1e-15);
        assert_eq!(s.rho_sp.matrix()[(1, 1)].re, 1.0);
    }

    #[test]
    fn parses_disd_document_with_default_window() {
        let file = parse_scenario(DISD).unwrap();
        let Scenario::Disd(s) = file.scenario else { panic!("wrong model") };
        assert_eq!(s.grid.len(), 200);
        assert!((s.grid.stop() - 100.0).abs() < 1e-12);
        assert!(s.h_sp.terms.is_empty());
        let rob = crate::dynamics::robustness_check(&s.strong_coupling().unwrap(), &s.p, &s.chi).unwrap();
        assert!(rob.holds);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let broken = "{\n  \"model\": \"disd\",\n  \"dims\": [2, 2 2]\n}";
        match parse_scenario(broken) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 17)),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let msg = parse_scenario(broken).unwrap_err().to_string();
        assert!(msg.contains("line 3, column 17"), "{msg}");
    }

    #[test]
    fn schema_errors_carry_position() {
        let typo = MARKOVIAN.replace("\"jumps\"", "\"jumpz\"");
        assert!(matches!(parse_scenario(&typo), Err(Error::Parse { .. })));
        assert!(matches!(parse_scenario("{\"seed\": 1}"), Err(Error::Parse { .. })));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let cases = [
            (MARKOVIAN.replace("\"lower\"", "\"bogus\""), "Sp.jumps"),
            (MARKOVIAN.replace("[[0, \"sx\"]]", "[[1, \"sx\"]]"), "S.hamiltonian"),
            (MARKOVIAN.replace("[[0.6,0],[0,0.8]]", "[[0.6,0],[0,0.9]]"), "S.state"),
            (MARKOVIAN.replace("\"rate\": 0.25", "\"rate\": -1"), "Sp.jumps"),
            (MARKOVIAN.replace("\"points\": 9", "\"points\": 0"), "time"),
            (DISD.replace("\"chi\": {\"basis\": 1}", "\"chi\": {\"basis\": 2}"), "chi"),
        ];
        for (text, field) in cases {
            let msg = parse_scenario(&text).unwrap_err().to_string();
            assert!(msg.contains(field), "{field}: {msg}");
        }
        let unknown = MARKOVIAN.replace("markovian-classicality", "quantum-foo");
        assert!(parse_scenario(&unknown).unwrap_err().to_string().contains("unknown model"));
    }

    #[test]
    fn point_override_keeps_window() {
        let file = parse_scenario(MARKOVIAN).unwrap().with_points(5).unwrap();
        let Scenario::Markovian(s) = file.scenario else { panic!("wrong model") };
        assert_eq!(s.grid.times(), &[0.0, 2.0, 4.0, 6.0, 8.0]);
    }
}

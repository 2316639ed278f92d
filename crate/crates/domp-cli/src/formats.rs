//! JSON documents for instances, systems, conic programs, solver results,
//! and verification reports, plus the conversions to and from the core
//! types. All indices are 0-based in every file format.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use domp_core::dnn::DnnResult;
use domp_core::instance::{Instance, InteractionCosts};
use domp_core::lift::{ConicProgram, LiftedMatrix};
use domp_core::qform::LinearSystem;

/// Instance file: `{"n":…,"p":…,"lambda":[…],"C":[[…]],"D":{…}?,"H":{…}?}`.
/// `D` couples permutation entries pairwise, `H` couples allocation
/// entries; both list one entry per unordered index pair and are mirrored
/// on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub n: usize,
    pub p: usize,
    pub lambda: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<PermTensorDoc>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<AssignTensorDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermTensorDoc {
    pub entries: Vec<PermTensorEntry>,
}

/// Interaction between permutation entries `(j, k)` and `(jp, kp)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermTensorEntry {
    pub j: usize,
    pub k: usize,
    pub jp: usize,
    pub kp: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignTensorDoc {
    pub entries: Vec<AssignTensorEntry>,
}

/// Interaction between allocation entries `(j, l)` and `(p, q)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssignTensorEntry {
    pub j: usize,
    pub l: usize,
    pub p: usize,
    pub q: usize,
    pub value: f64,
}

impl InstanceDoc {
    pub fn from_instance(instance: &Instance) -> Self {
        let n = instance.n();
        let c = (0..n)
            .map(|j| (0..n).map(|l| instance.cost(j, l)).collect())
            .collect();
        InstanceDoc {
            n,
            p: instance.p(),
            lambda: instance.lambda().to_vec(),
            c,
            d: instance.d().map(|t| PermTensorDoc {
                entries: upper_pairs(n, t)
                    .map(|((j, k), (jp, kp), value)| PermTensorEntry { j, k, jp, kp, value })
                    .collect(),
            }),
            h: instance.h().map(|t| AssignTensorDoc {
                entries: upper_pairs(n, t)
                    .map(|((j, l), (p, q), value)| AssignTensorEntry { j, l, p, q, value })
                    .collect(),
            }),
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        if self.c.len() != self.n {
            bail!("cost matrix has {} rows, expected {}", self.c.len(), self.n);
        }
        let mut costs = Vec::with_capacity(self.n * self.n);
        for (j, row) in self.c.iter().enumerate() {
            if row.len() != self.n {
                bail!("cost row {j} has {} entries, expected {}", row.len(), self.n);
            }
            costs.extend_from_slice(row);
        }
        let d = match &self.d {
            None => None,
            Some(doc) => Some(
                InteractionCosts::from_entries(
                    self.n,
                    doc.entries
                        .iter()
                        .map(|e| ((e.j, e.k), (e.jp, e.kp), e.value)),
                )
                .context("interaction tensor D")?,
            ),
        };
        let h = match &self.h {
            None => None,
            Some(doc) => Some(
                InteractionCosts::from_entries(
                    self.n,
                    doc.entries.iter().map(|e| ((e.j, e.l), (e.p, e.q), e.value)),
                )
                .context("interaction tensor H")?,
            ),
        };
        Instance::new(self.n, self.p, self.lambda.clone(), costs, d, h)
            .context("instance validation")
    }
}

/// One entry per unordered flat-index pair, split back into 4-index form.
fn upper_pairs(
    n: usize,
    tensor: &InteractionCosts,
) -> impl Iterator<Item = ((usize, usize), (usize, usize), f64)> + '_ {
    tensor.iter().filter_map(move |((a, b), value)| {
        if a > b {
            return None;
        }
        Some(((a / n, a % n), (b / n, b % n), value))
    })
}

/// Sparse equality system export:
/// `{"m":…,"N":…,"triplets":[[row,col,value],…],"b":[…],"labels":[…]}`,
/// triplets sorted by `(row, col)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemDoc {
    pub m: usize,
    #[serde(rename = "N")]
    pub cols: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub labels: Vec<String>,
}

impl SystemDoc {
    pub fn from_system(system: &LinearSystem) -> Self {
        SystemDoc {
            m: system.rows(),
            cols: system.cols(),
            triplets: system.triplets().collect(),
            b: system.b().to_vec(),
            labels: system.labels().iter().map(|l| l.to_string()).collect(),
        }
    }
}

/// Conic program export: `{"N1":…,"objective":[[r,c,v],…],"equalities":
/// [{"label":…,"rhs":…,"triplets":[[r,c,v],…]},…],"cone":…}`. Triplets
/// cover the upper triangle only, sorted; the represented matrices are
/// symmetric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramDoc {
    #[serde(rename = "N1")]
    pub n1: usize,
    pub objective: Vec<(usize, usize, f64)>,
    pub equalities: Vec<EqualityDoc>,
    pub cone: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualityDoc {
    pub label: String,
    pub rhs: f64,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl ProgramDoc {
    pub fn from_program(program: &ConicProgram) -> Self {
        ProgramDoc {
            n1: program.dim(),
            objective: program.objective.entries().to_vec(),
            equalities: program
                .equalities
                .iter()
                .map(|eq| EqualityDoc {
                    label: eq.label.clone(),
                    rhs: eq.rhs,
                    triplets: eq.coeffs.entries().to_vec(),
                })
                .collect(),
            cone: program.cone.as_str().to_string(),
        }
    }
}

/// Relaxation result:
/// `{"bound":…,"status":…,"iters":…,"primal_res":…,"dual_res":…}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub bound: f64,
    pub status: String,
    pub iters: usize,
    pub primal_res: f64,
    pub dual_res: f64,
}

impl ResultDoc {
    pub fn from_result(result: &DnnResult, bound: f64) -> Self {
        ResultDoc {
            bound,
            status: result.status.as_str().to_string(),
            iters: result.iters,
            primal_res: result.primal_res,
            dual_res: result.dual_res,
        }
    }
}

/// Verification report: the instance echoed back plus one record per
/// executed check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub instance: InstanceDoc,
    pub checks: Vec<CheckDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckDoc {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub detail: String,
}

/// Dense row-major CSV of a lifted matrix, one row per line.
pub fn matrix_csv(matrix: &LiftedMatrix) -> String {
    let dim = matrix.dim();
    let values = matrix.values();
    let mut out = String::new();
    for r in 0..dim {
        for c in 0..dim {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", values[r * dim + c]));
        }
        out.push('\n');
    }
    out
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    let doc: InstanceDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing instance file {}", path.display()))?;
    doc.to_instance()
}

/// Serializes `value` as pretty JSON to `--out FILE` or standard output.
pub fn emit_json<T: Serialize>(value: &T, out: Option<&std::path::Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

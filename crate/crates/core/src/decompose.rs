//! Atomic decompositions of cycles: flow decomposition, then surgery on
//! every cycle, then normalization into unit-mass atoms.

use serde::{Deserialize, Serialize};

use crate::current::{boundary_residual, discrepancy_ratio, BatterySpec, Lipschitz, WeightedCurrent};
use crate::cuts::MorreyBracket;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::space::{Point, Space};
use crate::surgery::{surgery_eta, BoundCheck, SurgeryCertificate, C_PRIME, IDENTITY_PARTITION};

/// Constant in the atom Morrey bound `C/ε²`.
pub const C_ATOM: f64 = 4.0 * C_PRIME;

/// Relative tolerance for flow conservation and re-aggregation.
pub const FLOW_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub flow: f64,
}

/// A flow on the straight (geodesic) edges of a graph embedded in `space`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlow {
    pub space: Space,
    pub nodes: Vec<Point>,
    pub edges: Vec<FlowEdge>,
}

/// A weighted vertex cycle `nodes[0] → nodes[1] → … → nodes[0]`, with the
/// flow edges it uses and their traversal signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub weight: f64,
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, f64)>,
}

impl EdgeFlow {
    pub fn validate(&self) -> Result<()> {
        for p in &self.nodes {
            self.space.check(p)?;
        }
        for (i, p) in self.nodes.iter().enumerate() {
            if self.nodes[..i].contains(p) {
                return Err(Error::DuplicateVertex(i));
            }
        }
        for e in &self.edges {
            if e.from >= self.nodes.len() || e.to >= self.nodes.len() || e.from == e.to {
                return Err(Error::InvalidParameter(format!(
                    "edge {} -> {} is not between distinct existing nodes",
                    e.from, e.to
                )));
            }
            if !e.flow.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let (net, scale) = self.divergence();
        for (v, (r, s)) in net.iter().zip(&scale).enumerate() {
            if r.abs() > FLOW_TOL * s.max(f64::MIN_POSITIVE) && *r != 0.0 {
                return Err(Error::NonConservativeFlow {
                    node: v,
                    residual: *r,
                });
            }
        }
        Ok(())
    }

    /// Net outflow per node and the total incident absolute flow.
    pub fn divergence(&self) -> (Vec<f64>, Vec<f64>) {
        let mut net = vec![0.0; self.nodes.len()];
        let mut scale = vec![0.0; self.nodes.len()];
        for e in &self.edges {
            net[e.from] += e.flow;
            net[e.to] -= e.flow;
            scale[e.from] += e.flow.abs();
            scale[e.to] += e.flow.abs();
        }
        (net, scale)
    }

    /// `Σ |flow| · length(edge)`, the mass bound of the associated current.
    pub fn mass_upper_bound(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.flow.abs() * self.space.dist(&self.nodes[e.from].0, &self.nodes[e.to].0))
            .sum()
    }

    /// Each edge as a one-edge open curve carrying its flow.
    pub fn as_current(&self) -> Result<WeightedCurrent> {
        let atoms = self
            .edges
            .iter()
            .filter(|e| e.flow != 0.0)
            .map(|e| {
                let c = Curve::from_vertices(
                    self.space.clone(),
                    &[self.nodes[e.from].clone(), self.nodes[e.to].clone()],
                    false,
                )?;
                Ok((e.flow, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedCurrent::new(atoms))
    }
}

/// Decomposes a conservative flow into positively weighted cycles by
/// repeatedly walking positive-residual edges from the lowest-indexed node
/// that still has outflow.
pub fn cycle_decompose(flow: &EdgeFlow) -> Result<Vec<Cycle>> {
    flow.validate()?;
    let k = flow.nodes.len();
    // oriented residual edges: (tail, head, original index, sign)
    let mut arcs: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut residual = Vec::new();
    for (i, e) in flow.edges.iter().enumerate() {
        if e.flow > 0.0 {
            arcs.push((e.from, e.to, i, 1.0));
            residual.push(e.flow);
        } else if e.flow < 0.0 {
            arcs.push((e.to, e.from, i, -1.0));
            residual.push(-e.flow);
        }
    }
    let max_flow = residual.iter().cloned().fold(0.0, f64::max);
    let floor = FLOW_TOL * max_flow;
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (a, &(t, _, _, _)) in arcs.iter().enumerate() {
        out_arcs[t].push(a);
    }
    let next_arc = |v: usize, residual: &[f64]| out_arcs[v].iter().copied().find(|&a| residual[a] > floor);
    let mut cycles = Vec::new();
    while let Some(start) = (0..k).find(|&v| next_arc(v, &residual).is_some()) {
        let mut seen = vec![usize::MAX; k];
        let mut path_nodes = vec![start];
        let mut path_arcs: Vec<usize> = Vec::new();
        seen[start] = 0;
        let mut v = start;
        let closed_at = loop {
            match next_arc(v, &residual) {
                Some(a) => {
                    path_arcs.push(a);
                    v = arcs[a].1;
                    if seen[v] != usize::MAX {
                        break Some(seen[v]);
                    }
                    seen[v] = path_nodes.len();
                    path_nodes.push(v);
                }
                None => break None,
            }
        };
        let Some(pos) = closed_at else {
            // residue below tolerance strands the walk; discard the last arc
            let a = *path_arcs.last().expect("walk starts with an arc");
            residual[a] = 0.0;
            continue;
        };
        let loop_arcs = &path_arcs[pos..];
        let w = loop_arcs.iter().map(|&a| residual[a]).fold(f64::INFINITY, f64::min);
        for &a in loop_arcs {
            residual[a] -= w;
            if residual[a] <= floor {
                residual[a] = 0.0;
            }
        }
        cycles.push(Cycle {
            weight: w,
            nodes: path_nodes[pos..].to_vec(),
            edges: loop_arcs.iter().map(|&a| (arcs[a].2, arcs[a].3)).collect(),
        });
    }
    Ok(cycles)
}

/// Worst relative discrepancy between the flow and its re-aggregated cycles.
pub fn reaggregation_error(flow: &EdgeFlow, cycles: &[Cycle]) -> f64 {
    let mut agg = vec![0.0; flow.edges.len()];
    for c in cycles {
        for &(i, s) in &c.edges {
            agg[i] += s * c.weight;
        }
    }
    let scale = flow.edges.iter().map(|e| e.flow.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    flow.edges
        .iter()
        .zip(&agg)
        .map(|(e, a)| (e.flow - a).abs() / scale)
        .fold(0.0, f64::max)
}

/// The closed curves of a cycle decomposition, with their weights.
pub fn cycles_to_current(flow: &EdgeFlow, cycles: &[Cycle]) -> Result<WeightedCurrent> {
    let atoms = cycles
        .iter()
        .map(|c| {
            let pts: Vec<Point> = c.nodes.iter().map(|&v| flow.nodes[v].clone()).collect();
            Ok((c.weight, Curve::from_vertices(flow.space.clone(), &pts, true)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightedCurrent::new(atoms))
}

/// `λ · [[γ]] / length(γ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub curve: Curve,
    pub morrey: MorreyBracket,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub lambda_sum: f64,
    pub mass_bound: f64,
    pub morrey_constant: f64,
    pub checks: Vec<BoundCheck>,
    pub surgeries: Vec<SurgeryCertificate>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub atoms: Vec<Atom>,
    pub epsilon: f64,
    pub certificates: DecompositionCertificate,
}

impl AtomicDecomposition {
    pub fn all_ok(&self) -> bool {
        self.certificates.checks.iter().all(|c| c.ok)
    }

    /// `Σ λ_i [[γ_i]] / length(γ_i)` as a weighted curve sum.
    pub fn as_current(&self) -> WeightedCurrent {
        WeightedCurrent::new(
            self.atoms
                .iter()
                .map(|a| (a.lambda / a.curve.length(), a.curve.clone()))
                .collect(),
        )
    }
}

/// Decomposes a flow: cycles first, then [`atomic_decomposition`].
pub fn decompose_flow(flow: &EdgeFlow, eps: f64) -> Result<AtomicDecomposition> {
    let cycles = cycle_decompose(flow)?;
    let current = cycles_to_current(flow, &cycles)?;
    let mut out = atomic_decomposition(&current, eps)?;
    let err = reaggregation_error(flow, &cycles);
    out.certificates
        .checks
        .push(BoundCheck::le("flow re-aggregation", err, FLOW_TOL));
    out.certificates.mass_bound = flow.mass_upper_bound();
    let lambda_sum = out.certificates.lambda_sum;
    out.certificates.checks.push(BoundCheck::le(
        "lambda sum vs flow mass",
        lambda_sum,
        (1.0 + eps) * flow.mass_upper_bound() * (1.0 + 1e-12),
    ));
    Ok(out)
}

/// Runs the η = ε surgery on every curve of a boundaryless weighted current
/// and certifies the mass and Morrey bounds of the resulting atoms.
pub fn atomic_decomposition(input: &WeightedCurrent, eps: f64) -> Result<AtomicDecomposition> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if input.atoms.iter().any(|(l, _)| *l < 0.0 || !l.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
    }
    let coords: Vec<Lipschitz> = match input.atoms.first() {
        Some((_, c)) => (0..c.space().dim()).map(Lipschitz::coordinate).collect(),
        None => Vec::new(),
    };
    let residual = boundary_residual(input, &coords);
    if residual != 0.0 {
        return Err(Error::NonzeroBoundary(residual));
    }
    let mut atoms = Vec::new();
    let mut surgeries = Vec::new();
    for (w, c) in &input.atoms {
        if *w == 0.0 || c.length() == 0.0 {
            continue;
        }
        let c = if c.is_closed() { c.clone() } else { c.clone().close()? };
        let res = surgery_eta(&c, eps)?;
        for (piece, m) in res.pieces.iter().zip(&res.certificate.morrey) {
            atoms.push(Atom {
                lambda: w * piece.length(),
                curve: piece.clone(),
                morrey: *m,
            });
        }
        surgeries.push(res.certificate);
    }
    let mass_bound = input.mass_upper_bound();
    let lambda_sum: f64 = atoms.iter().map(|a| a.lambda).sum();
    let limit = C_ATOM / (eps * eps);
    let worst = atoms.iter().map(|a| a.morrey.hi).fold(0.0, f64::max);
    let mut checks = vec![
        BoundCheck::le("lambda sum", lambda_sum, (1.0 + eps) * mass_bound * (1.0 + 1e-12)),
        BoundCheck::le("atom Morrey norm", worst, limit),
        BoundCheck::le(
            "surgery certificates failing",
            surgeries.iter().filter(|s| !s.bound_checks.iter().all(|c| c.ok)).count() as f64,
            0.0,
        ),
    ];
    let decomposition = AtomicDecomposition {
        atoms,
        epsilon: eps,
        certificates: DecompositionCertificate {
            lambda_sum,
            mass_bound,
            morrey_constant: C_ATOM,
            checks: Vec::new(),
            surgeries,
        },
    };
    checks.push(reproduction_check(input, &decomposition.as_current())?);
    let mut decomposition = decomposition;
    decomposition.certificates.checks = checks;
    Ok(decomposition)
}

/// Ratio of `|T(ω) − Σ λ a(ω)|` to the quadrature bound, maximized over a
/// cone battery covering the input.
pub fn reproduction_check(input: &WeightedCurrent, output: &WeightedCurrent) -> Result<BoundCheck> {
    let Some((_, first)) = input.atoms.first() else {
        return Ok(BoundCheck::le("current reproduction", 0.0, 1.0));
    };
    let space = first.space().clone();
    let d = space.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for (_, c) in &input.atoms {
        let (a, b) = c.bbox();
        for k in 0..d {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(b[k]);
        }
    }
    let battery = BatterySpec::covering(&space, &lo, &hi, 3).build(&space)?;
    let worst = discrepancy_ratio(&input.minus(output), &battery, IDENTITY_PARTITION)?;
    Ok(BoundCheck::le("current reproduction (discrepancy / quadrature bound)", worst, 1.0))
}

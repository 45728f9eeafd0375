//! The Markov diagram of f_a, its edge census, constrained path enumeration and
//! the reflection-principle walk counts that bound it.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::Zero;
use serde::Serialize;

use crate::alphabet::{Class, Symbol};
use crate::error::{Error, Result};
use crate::maps::{BakerMap, MapParams};
use crate::numerics::{Affine1, Rect2};

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// Open rectangle inside int(Ω_γ^+).
    pub region: Rect2,
    pub symbol: Symbol,
    pub level: i64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub up: usize,
    pub down: usize,
    pub flat: usize,
    /// Successors whose level differs by more than one.
    pub other: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusViolation {
    pub vertex: VertexId,
    pub level: i64,
    pub symbol: Symbol,
    pub expected: Census,
    pub found: Census,
}

#[derive(Clone, Debug)]
pub struct MarkovDiagram {
    map: BakerMap,
    steps: usize,
    vertices: Vec<Vertex>,
    successors: Vec<Option<Vec<VertexId>>>,
    in_v0: Vec<bool>,
}

impl MarkovDiagram {
    /// All vertices reachable in at most `depth` successor steps from 𝒱_α ∪ 𝒱_β.
    /// Successors of the vertices first reached at step `depth` are left unbuilt.
    pub fn build(params: &MapParams, depth: usize) -> Self {
        let map = BakerMap::new(params);
        let mut vertices = Vec::new();
        let mut index: HashMap<Rect2, VertexId> = HashMap::new();
        for b in map.branches() {
            let region = b.domain.interior();
            let level = match b.symbol.kind {
                Class::Alpha => -1,
                Class::Beta => 0,
            };
            index.insert(region.clone(), vertices.len());
            vertices.push(Vertex {
                region,
                symbol: b.symbol,
                level,
            });
        }
        let n0 = vertices.len();
        let mut successors: Vec<Option<Vec<VertexId>>> = vec![None; n0];
        let mut frontier: Vec<VertexId> = (0..n0).collect();
        for step in 1..=depth {
            let mut next = Vec::new();
            for &v in &frontier {
                let (region, sym) = (vertices[v].region.clone(), vertices[v].symbol);
                let image = map.branch(sym).apply_rect(&region);
                let mut out = Vec::with_capacity(map.branches().len());
                for b in map.branches() {
                    let Some(piece) = image.intersect(&b.domain.interior()) else {
                        continue;
                    };
                    let id = match index.get(&piece) {
                        Some(&id) => id,
                        None => {
                            let id = vertices.len();
                            index.insert(piece.clone(), id);
                            vertices.push(Vertex {
                                region: piece,
                                symbol: b.symbol,
                                level: step as i64 - 1,
                            });
                            successors.push(None);
                            next.push(id);
                            id
                        }
                    };
                    out.push(id);
                }
                successors[v] = Some(out);
            }
            frontier = next;
        }
        let mut in_v0 = vec![false; vertices.len()];
        in_v0[..n0].iter_mut().for_each(|b| *b = true);
        MarkovDiagram {
            map,
            steps: depth,
            vertices,
            successors,
            in_v0,
        }
    }

    pub fn params(&self) -> &MapParams {
        self.map.params()
    }

    pub fn depth(&self) -> usize {
        self.steps
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn level(&self, v: VertexId) -> i64 {
        self.vertices[v].level
    }

    /// Membership in 𝒱_0 = 𝒱_α ∪ 𝒱_β.
    pub fn in_v0(&self, v: VertexId) -> bool {
        self.in_v0[v]
    }

    /// Membership in 𝒱_β, the interiors of the Ω_{β_i}^+.
    pub fn in_v_beta(&self, v: VertexId) -> bool {
        self.in_v0[v] && self.vertices[v].symbol.is_beta()
    }

    pub fn successors(&self, v: VertexId) -> Result<&[VertexId]> {
        self.successors[v]
            .as_deref()
            .ok_or(Error::SuccessorsNotBuilt(v))
    }

    /// Vertex counts per level, from level −1 upward.
    pub fn level_counts(&self) -> Vec<(i64, usize)> {
        let mut counts: std::collections::BTreeMap<i64, usize> = Default::default();
        for v in &self.vertices {
            *counts.entry(v.level).or_default() += 1;
        }
        counts.into_iter().collect()
    }

    pub fn edge_census(&self, v: VertexId) -> Result<Census> {
        let l = self.level(v);
        let mut c = Census::default();
        for &w in self.successors(v)? {
            match self.level(w) - l {
                1 => c.up += 1,
                -1 => c.down += 1,
                0 => c.flat += 1,
                _ => c.other += 1,
            }
        }
        Ok(c)
    }

    /// The census each vertex should have under rules (i)–(iv).
    pub fn expected_census(&self, v: VertexId) -> Census {
        let m = self.params().m as usize;
        let sym = self.vertices[v].symbol;
        let (up, down, flat) = match (self.in_v0(v), sym.kind) {
            (true, Class::Alpha) => (m + 1, 0, 0),
            (true, Class::Beta) => (0, m, m),
            (false, Class::Alpha) => (m + 1, 0, 0),
            (false, Class::Beta) => (0, m + 1, 0),
        };
        Census {
            up,
            down,
            flat,
            other: 0,
        }
    }

    /// Every built vertex whose census departs from rules (i)–(iv).
    pub fn census_violations(&self) -> Vec<CensusViolation> {
        (0..self.len())
            .filter_map(|v| {
                let found = self.edge_census(v).ok()?;
                let expected = self.expected_census(v);
                (found != expected).then(|| CensusViolation {
                    vertex: v,
                    level: self.level(v),
                    symbol: self.vertices[v].symbol,
                    expected,
                    found,
                })
            })
            .collect()
    }

    pub fn vertices_with_census(&self) -> usize {
        self.successors.iter().filter(|s| s.is_some()).count()
    }

    fn is_hold(&self, u: VertexId, v: VertexId) -> bool {
        self.in_v_beta(u) && self.in_v_beta(v)
    }

    /// Calls `visit` on every path of length `n` satisfying the constraint.
    pub fn for_each_path<F: FnMut(&[VertexId])>(
        &self,
        n: usize,
        constraint: &PathConstraint,
        mut visit: F,
    ) -> Result<()> {
        let starts: Vec<VertexId> = match *constraint {
            PathConstraint::NoHoldTime { start } => vec![start],
            PathConstraint::FirstPassage { start, .. } => {
                if self.level(start) != 0 || self.in_v_beta(start) {
                    return Err(Error::InvalidParams(
                        "first-passage paths start in L_0 outside V_β".into(),
                    ));
                }
                vec![start]
            }
            PathConstraint::Star => {
                let l0 = if n % 2 == 1 { -1 } else { 0 };
                (0..self.len()).filter(|&v| self.level(v) == l0).collect()
            }
        };
        let mut path = Vec::with_capacity(n + 1);
        for s in starts {
            path.clear();
            path.push(s);
            self.extend(&mut path, n, constraint, &mut visit)?;
        }
        Ok(())
    }

    fn extend<F: FnMut(&[VertexId])>(
        &self,
        path: &mut Vec<VertexId>,
        n: usize,
        constraint: &PathConstraint,
        visit: &mut F,
    ) -> Result<()> {
        let k = path.len() - 1;
        let last = path[k];
        if k == n {
            let ok = match *constraint {
                PathConstraint::NoHoldTime { .. } => true,
                PathConstraint::FirstPassage { j, .. } => self.level(last) == j,
                PathConstraint::Star => self.level(last) == 0,
            };
            if ok {
                visit(path);
            }
            return Ok(());
        }
        let succ = self.successors(last).map_err(|_| Error::InsufficientDepth {
            depth: self.steps,
            level: self.level(last),
        })?;
        let remaining = (n - k - 1) as i64;
        for &w in succ {
            if self.is_hold(last, w) {
                continue;
            }
            let lw = self.level(w);
            let keep = match *constraint {
                PathConstraint::NoHoldTime { .. } => true,
                PathConstraint::FirstPassage { j, .. } => lw >= 1 && (lw - j).abs() <= remaining,
                PathConstraint::Star => (lw - 0).abs() <= remaining,
            };
            if keep {
                path.push(w);
                self.extend(path, n, constraint, visit)?;
                path.pop();
            }
        }
        Ok(())
    }

    pub fn enumerate_paths(&self, n: usize, constraint: &PathConstraint) -> Result<Vec<DiagramPath>> {
        let mut out = Vec::new();
        self.for_each_path(n, constraint, |p| {
            out.push(DiagramPath {
                vertices: p.to_vec(),
            })
        })?;
        Ok(out)
    }

    pub fn count_paths(&self, n: usize, constraint: &PathConstraint) -> Result<usize> {
        let mut c = 0;
        self.for_each_path(n, constraint, |_| c += 1)?;
        Ok(c)
    }

    /// Φ_n: the level sequence of a path.
    pub fn project(&self, path: &DiagramPath) -> Vec<i64> {
        path.vertices.iter().map(|&v| self.level(v)).collect()
    }

    pub fn is_valid_path(&self, path: &DiagramPath) -> bool {
        path.vertices.windows(2).all(|e| {
            self.successors(e[0])
                .map(|s| s.contains(&e[1]))
                .unwrap_or(false)
        })
    }

    pub fn hold_times(&self, path: &DiagramPath) -> usize {
        path.vertices
            .windows(2)
            .filter(|e| self.is_hold(e[0], e[1]))
            .count()
    }

    /// S_nφ^c on the path's rectangle via the level formulas: a hold time adds +1,
    /// any other edge adds l(v_k) − l(v_{k+1}).
    pub fn path_birkhoff(&self, path: &DiagramPath) -> i64 {
        path.vertices
            .windows(2)
            .map(|e| {
                if self.is_hold(e[0], e[1]) {
                    1
                } else {
                    self.level(e[0]) - self.level(e[1])
                }
            })
            .sum()
    }

    /// S_nφ^c summed directly from the vertex symbols.
    pub fn path_birkhoff_direct(&self, path: &DiagramPath) -> i64 {
        let n = path.vertices.len().saturating_sub(1);
        path.vertices[..n]
            .iter()
            .map(|&v| self.vertices[v].symbol.kind.jacobian_sign())
            .sum()
    }

    /// The open rectangle ∩_k f^{−k}(v_k).
    pub fn path_region(&self, path: &DiagramPath) -> Option<Rect2> {
        let first = *path.vertices.first()?;
        let mut cyl = self.vertices[first].region.clone();
        let mut image = cyl.clone();
        let mut to_image = (Affine1::identity(), Affine1::identity());
        for e in path.vertices.windows(2) {
            let b = self.map.branch(self.vertices[e[0]].symbol);
            let moved = b.apply_rect(&image);
            to_image = (b.fx.after(&to_image.0), b.fy.after(&to_image.1));
            image = moved.intersect(&self.vertices[e[1]].region)?;
            cyl = Rect2::new(
                to_image.0.inverse().image(&image.x),
                to_image.1.inverse().image(&image.y),
            );
        }
        Some(cyl)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathConstraint {
    /// P_n restricted to paths starting at `start`.
    NoHoldTime { start: VertexId },
    /// P_n(j; v): start at v ∈ L_0 \ 𝒱_β, stay at level ≥ 1, end at level j.
    FirstPassage { j: i64, start: VertexId },
    /// P_n*: no hold time, from level −1 (n odd) or 0 (n even) back to level 0.
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DiagramPath {
    pub vertices: Vec<VertexId>,
}

/// #Z_n*(s, t): ±1 walks from s to t in n steps staying strictly above s after the start.
pub fn walk_strict_count(n: u64, s: i64, t: i64) -> BigUint {
    if n == 0 || t <= s {
        return BigUint::zero();
    }
    let d = (t - s) as u64;
    if d > n || (n - d) % 2 != 0 {
        return BigUint::zero();
    }
    let c = binomial(BigUint::from(n), BigUint::from((n + d) / 2));
    c * BigUint::from(d) / BigUint::from(n)
}

/// Walks from j that first hit 0 at step n.
pub fn walk_first_passage_count(n: i64, j: i64) -> Result<BigUint> {
    if n < 1 || j < 1 {
        return Err(Error::InvalidParams(format!("need n, j ≥ 1, got n = {n}, j = {j}")));
    }
    if (n - j).rem_euclid(2) != 0 {
        return Err(Error::ParityMismatch { n, j });
    }
    Ok(walk_strict_count(n as u64, 0, j))
}

/// Lemma bound on #Φ_n⁻¹(l_0…l_n) from one start vertex: (m+1)·m^{(n + l_n − l_0)/2}.
pub fn lemma_count_bound(m: u32, walk: &[i64]) -> BigUint {
    let n = walk.len() as i64 - 1;
    let e = (n + walk[walk.len() - 1] - walk[0]) / 2;
    BigUint::from(m + 1) * BigUint::from(m).pow(e.max(0) as u32)
}

/// Lemma bound on #P_n(j; v): (j/n)·C(n, (n+j)/2)·((m+1)/m)·m^{(n+j)/2}, as a float.
pub fn first_passage_path_bound(m: u32, n: i64, j: i64) -> f64 {
    let walks = walk_strict_count(n as u64, 0, j);
    let e = ((n + j) / 2) as i32;
    to_f64(&walks) * (m as f64 + 1.0) / m as f64 * (m as f64).powi(e)
}

/// Lemma bound on #P_n*: 2(m+1)/(n+1) · C(n+2, ⌊(n+4)/2⌋) · m^{⌊(n+1)/2⌋}.
pub fn star_path_bound(m: u32, n: u64) -> f64 {
    let c = binomial(BigUint::from(n + 2), BigUint::from((n + 4) / 2));
    2.0 * (m as f64 + 1.0) / (n as f64 + 1.0) * to_f64(&c) * (m as f64).powi(((n + 1) / 2) as i32)
}

fn to_f64(n: &BigUint) -> f64 {
    use num_traits::ToPrimitive;
    n.to_f64().unwrap_or(f64::INFINITY)
}

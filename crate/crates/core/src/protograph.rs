//! Protograph representation, degree profiles and lifting.
//!
//! A protograph is a small `m x n` matrix of edge multiplicities. Lifting by a
//! factor `Z` replaces every unit of multiplicity with a `Z x Z` permutation,
//! giving an `mZ x nZ` parity-check matrix. [`lift`] draws general
//! permutations; [`lift_circulant`] uses circulant shifts (quasi-cyclic).
//! Both pick connections greedily in a seeded random order, rejecting those
//! that close a length-4 cycle whenever an alternative exists.
//!
//! Circulants commute, so a quasi-cyclic lift of a protograph with parallel
//! edges keeps the low-weight codewords allowed by the protograph's
//! permanent bound (weight 8 for `S17`). Simulation uses [`lift`].

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Base matrix of edge multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Protograph {
    name: String,
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl Protograph {
    /// Builds a protograph from row vectors, validating shape, connectivity
    /// and rate.
    pub fn new(name: impl Into<String>, rows: Vec<Vec<u32>>) -> Result<Self> {
        let name = name.into();
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidProtograph("no rows".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidProtograph("empty row".into()));
        }
        if let Some((j, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidProtograph(format!(
                "ragged rows: row {} has {} entries, expected {}",
                j,
                r.len(),
                n
            )));
        }
        let entries: Vec<u32> = rows.into_iter().flatten().collect();
        let p = Protograph {
            name,
            rows: m,
            cols: n,
            entries,
        };
        for j in 0..m {
            if p.row(j).iter().sum::<u32>() == 0 {
                return Err(Error::InvalidProtograph(format!("row {j} is all zero")));
            }
        }
        for i in 0..n {
            if (0..m).map(|j| p.get(j, i)).sum::<u32>() == 0 {
                return Err(Error::InvalidProtograph(format!("column {i} is all zero")));
            }
        }
        if m >= n {
            return Err(Error::InvalidProtograph(format!(
                "design rate (n - m)/n must lie in (0, 1), got m = {m}, n = {n}"
            )));
        }
        Ok(p)
    }

    /// Parses whitespace-delimited integer rows. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let v: i64 = tok.parse().map_err(|_| {
                        Error::Parse(format!("line {}: `{}` is not an integer", lineno + 1, tok))
                    })?;
                    if v < 0 {
                        return Err(Error::Parse(format!(
                            "line {}: negative entry {}",
                            lineno + 1,
                            v
                        )));
                    }
                    u32::try_from(v)
                        .map_err(|_| Error::Parse(format!("line {}: entry too large", lineno + 1)))
                })
                .collect::<Result<Vec<u32>>>()?;
            rows.push(row);
        }
        Protograph::new(name, rows)
    }

    /// One of the compiled-in protographs: `S17`, `S36`, `Sm`, `Sc`
    /// (case-insensitive).
    pub fn preset(name: &str) -> Option<Protograph> {
        let (canon, rows): (&str, [[u32; 4]; 2]) = match name.to_ascii_lowercase().as_str() {
            "s17" => ("S17", [[2, 3, 1, 1], [0, 1, 4, 1]]),
            "s36" => ("S36", [[2, 1, 2, 3], [1, 4, 0, 1]]),
            "sm" => ("Sm", [[3, 2, 1, 2], [0, 1, 1, 4]]),
            "sc" => ("Sc", [[0, 1, 2, 5], [2, 2, 0, 2]]),
            _ => return None,
        };
        Some(
            Protograph::new(canon, rows.iter().map(|r| r.to_vec()).collect())
                .expect("preset protographs are valid"),
        )
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["S17", "S36", "Sm", "Sc"]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Design rate `(n - m) / n`.
    pub fn rate(&self) -> f64 {
        (self.cols - self.rows) as f64 / self.cols as f64
    }

    /// Total number of protograph edges (sum of all entries).
    pub fn edge_count(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let var_degrees: Vec<u32> = (0..self.cols)
            .map(|i| (0..self.rows).map(|j| self.get(j, i)).sum())
            .collect();
        let check_degrees: Vec<u32> = (0..self.rows).map(|j| self.row(j).iter().sum()).collect();
        let max_dv = var_degrees.iter().copied().max().unwrap_or(0);
        DegreeProfile {
            guard_bits: guard_bits_for(max_dv),
            var_degrees,
            check_degrees,
        }
    }

    /// Plain text in the format accepted by [`Protograph::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for j in 0..self.rows {
            let row: Vec<String> = self.row(j).iter().map(|v| v.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Smallest `b` with `2^b >= max_dv + 1`, i.e. `ceil(log2(max_dv + 1))`.
pub fn guard_bits_for(max_dv: u32) -> u32 {
    let target = u64::from(max_dv) + 1;
    let mut b = 0;
    while (1u64 << b) < target {
        b += 1;
    }
    b
}

/// Node degrees of a protograph plus the posterior guard width `q_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub var_degrees: Vec<u32>,
    pub check_degrees: Vec<u32>,
    pub guard_bits: u32,
}

impl DegreeProfile {
    pub fn max_var_degree(&self) -> u32 {
        self.var_degrees.iter().copied().max().unwrap_or(0)
    }
}

/// One circulant of a lifted protograph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circulant {
    pub row: usize,
    pub col: usize,
    pub shift: usize,
}

/// Sparse parity-check matrix with row (check) and column (variable)
/// adjacency.
///
/// Edges are stored grouped by check; within a check they are sorted by
/// variable index. Edge `e` joins check `c` with `edge_var[e]` for
/// `e in check_ptr[c]..check_ptr[c + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCode {
    n_vars: usize,
    n_checks: usize,
    lifting: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
    layers: Vec<Range<usize>>,
    circulants: Vec<Circulant>,
}

impl LiftedCode {
    /// Builds a code from an explicit edge list. All checks form one layer.
    pub fn from_edges(n_vars: usize, n_checks: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize)> = edges.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge (check {}, var {})",
                    w[0].0, w[0].1
                )));
            }
        }
        if let Some(&(c, v)) = sorted.iter().find(|&&(c, v)| c >= n_checks || v >= n_vars) {
            return Err(Error::InvalidParameter(format!(
                "edge (check {c}, var {v}) out of range for {n_checks}x{n_vars}"
            )));
        }
        Ok(Self::assemble(
            n_vars,
            n_checks,
            1,
            &sorted,
            vec![0..n_checks],
            Vec::new(),
        ))
    }

    fn assemble(
        n_vars: usize,
        n_checks: usize,
        lifting: usize,
        sorted_edges: &[(usize, usize)],
        layers: Vec<Range<usize>>,
        circulants: Vec<Circulant>,
    ) -> Self {
        let mut check_ptr = vec![0usize; n_checks + 1];
        for &(c, _) in sorted_edges {
            check_ptr[c + 1] += 1;
        }
        for c in 0..n_checks {
            check_ptr[c + 1] += check_ptr[c];
        }
        let edge_var: Vec<u32> = sorted_edges.iter().map(|&(_, v)| v as u32).collect();
        let mut var_ptr = vec![0usize; n_vars + 1];
        for &(_, v) in sorted_edges {
            var_ptr[v + 1] += 1;
        }
        for v in 0..n_vars {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0u32; sorted_edges.len()];
        for (e, &(_, v)) in sorted_edges.iter().enumerate() {
            var_edges[fill[v]] = e as u32;
            fill[v] += 1;
        }
        LiftedCode {
            n_vars,
            n_checks,
            lifting,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            layers,
            circulants,
        }
    }

    /// Codeword length `N`.
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Number of parity checks `M`.
    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    /// Lifting factor `Z` (1 for codes built from an edge list).
    pub fn lifting(&self) -> usize {
        self.lifting
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge index range of check `c`.
    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_ptr[c]..self.check_ptr[c + 1]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_ptr[c + 1] - self.check_ptr[c]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_ptr[v + 1] - self.var_ptr[v]
    }

    /// Edge indices incident to variable `v`.
    pub fn var_edge_ids(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    /// Check-index ranges processed as one layer, one per protograph row.
    pub fn layers(&self) -> &[Range<usize>] {
        &self.layers
    }

    /// Circulants chosen by [`lift_circulant`] (empty otherwise).
    pub fn circulants(&self) -> &[Circulant] {
        &self.circulants
    }

    /// `(check, variable)` pairs in storage order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for c in 0..self.n_checks {
            for e in self.check_edges(c) {
                out.push((c, self.edge_var(e)));
            }
        }
        out
    }

    /// True when every check is satisfied by the hard decisions.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        (0..self.n_checks).all(|c| {
            self.check_edges(c)
                .fold(0u8, |acc, e| acc ^ bits[self.edge_var(e)])
                == 0
        })
    }

    /// Number of 4-cycles (each counted once) found by scanning variable
    /// pairs shared by two checks.
    pub fn count_four_cycles(&self) -> usize {
        let mut seen: std::collections::HashMap<(u32, u32), usize> =
            std::collections::HashMap::new();
        for c in 0..self.n_checks {
            let vars: Vec<u32> = self.check_edges(c).map(|e| self.edge_var[e]).collect();
            for a in 0..vars.len() {
                for b in a + 1..vars.len() {
                    let key = (vars[a].min(vars[b]), vars[a].max(vars[b]));
                    *seen.entry(key).or_insert(0) += 1;
                }
            }
        }
        seen.values().map(|&k| k * (k - 1) / 2).sum()
    }

    /// MacKay alist text: `N M`, max degrees, column then row degrees, then
    /// 1-indexed neighbour lists zero-padded to the maximum degree.
    pub fn to_alist(&self) -> String {
        let col_deg: Vec<usize> = (0..self.n_vars).map(|v| self.var_degree(v)).collect();
        let row_deg: Vec<usize> = (0..self.n_checks).map(|c| self.check_degree(c)).collect();
        let max_col = col_deg.iter().copied().max().unwrap_or(0);
        let max_row = row_deg.iter().copied().max().unwrap_or(0);
        let join = |xs: &mut dyn Iterator<Item = usize>| {
            xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n_vars, self.n_checks);
        let _ = writeln!(s, "{} {}", max_col, max_row);
        let _ = writeln!(s, "{}", join(&mut col_deg.iter().copied()));
        let _ = writeln!(s, "{}", join(&mut row_deg.iter().copied()));
        for v in 0..self.n_vars {
            let mut checks: Vec<usize> = self
                .var_edge_ids(v)
                .iter()
                .map(|&e| self.check_of_edge(e as usize) + 1)
                .collect();
            checks.sort_unstable();
            checks.resize(max_col, 0);
            let _ = writeln!(s, "{}", join(&mut checks.into_iter()));
        }
        for c in 0..self.n_checks {
            let mut vars: Vec<usize> = self.check_edges(c).map(|e| self.edge_var(e) + 1).collect();
            vars.resize(max_row, 0);
            let _ = writeln!(s, "{}", join(&mut vars.into_iter()));
        }
        s
    }

    /// Parses alist text. Zero padding is accepted; the row lists are
    /// checked against the column lists.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("alist: bad integer `{t}`")))
                    })
                    .collect::<Result<Vec<usize>>>()
            });
        let mut next = |what: &str| -> Result<Vec<usize>> {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("alist: missing {what}")))?
        };
        let dims = next("dimensions")?;
        if dims.len() != 2 {
            return Err(Error::Parse("alist: header must be `N M`".into()));
        }
        let (n, m) = (dims[0], dims[1]);
        let _max = next("max degrees")?;
        let col_deg = next("column degrees")?;
        let row_deg = next("row degrees")?;
        if col_deg.len() != n || row_deg.len() != m {
            return Err(Error::Parse("alist: degree list length mismatch".into()));
        }
        let mut edges = Vec::new();
        for (v, &d) in col_deg.iter().enumerate() {
            let list = next("column list")?;
            let nz: Vec<usize> = list.into_iter().filter(|&x| x != 0).collect();
            if nz.len() != d {
                return Err(Error::Parse(format!("alist: column {} degree mismatch", v + 1)));
            }
            for c in nz {
                if c > m {
                    return Err(Error::Parse(format!("alist: row index {c} out of range")));
                }
                edges.push((c - 1, v));
            }
        }
        let mut from_rows = Vec::new();
        for (c, &d) in row_deg.iter().enumerate() {
            let list = next("row list")?;
            let nz: Vec<usize> = list.into_iter().filter(|&x| x != 0).collect();
            if nz.len() != d {
                return Err(Error::Parse(format!("alist: row {} degree mismatch", c + 1)));
            }
            for v in nz {
                if v > n {
                    return Err(Error::Parse(format!("alist: column index {v} out of range")));
                }
                from_rows.push((c, v - 1));
            }
        }
        let mut a = edges.clone();
        a.sort_unstable();
        from_rows.sort_unstable();
        if a != from_rows {
            return Err(Error::Parse("alist: row and column lists disagree".into()));
        }
        LiftedCode::from_edges(n, m, &edges)
    }

    fn check_of_edge(&self, e: usize) -> usize {
        // check_ptr is non-decreasing; find the last c with check_ptr[c] <= e
        self.check_ptr.partition_point(|&p| p <= e) - 1
    }
}

/// Lifts `p` by factor `z` with one random permutation per unit of edge
/// multiplicity.
///
/// Permutations are built in row-major protograph order. Each lifted
/// variable (visited in random order) takes a free check of the row from a
/// random starting point, skipping checks it already touches and, when
/// possible, checks that would close a 4-cycle. A variable left without an
/// admissible free check is placed by an augmenting path; a local search then
/// swaps edges within permutations to remove remaining 4-cycles, and the
/// whole construction restarts on a new random stream if some are left.
pub fn lift(p: &Protograph, z: usize, seed: u64) -> Result<LiftedCode> {
    check_lifting(p, z)?;
    let mut best: Option<(usize, LiftedCode)> = None;
    for attempt in 0..LIFT_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let code = lift_once(p, z, rng)?;
        let cycles = code.count_four_cycles();
        if best.as_ref().map_or(true, |b| cycles < b.0) {
            best = Some((cycles, code));
        }
        if cycles == 0 {
            break;
        }
    }
    Ok(best.unwrap().1)
}

/// Local-search passes over all permutations.
const REPAIR_SWEEPS: usize = 20;
const SIDEWAYS_PROB: f64 = 0.2;

/// Restarts of [`lift`] (on fresh random streams) while 4-cycles remain.
const LIFT_ATTEMPTS: u64 = 16;

fn lift_once(p: &Protograph, z: usize, rng: ChaCha8Rng) -> Result<LiftedCode> {
    let mut g = PermLifter {
        rng,
        var_adj: vec![Vec::new(); p.cols() * z],
        check_adj: vec![Vec::new(); p.rows() * z],
        owner: vec![None; z],
        cur: vec![0; z],
        perms: Vec::new(),
        z,
    };
    for j in 0..p.rows() {
        for i in 0..p.cols() {
            for _ in 0..p.get(j, i) {
                g.permutation(j, i)?;
            }
        }
    }
    g.repair();
    let mut edges: Vec<(usize, usize)> = g
        .check_adj
        .iter()
        .enumerate()
        .flat_map(|(c, vs)| vs.iter().map(move |&v| (c, v)))
        .collect();
    edges.sort_unstable();
    debug_assert!(edges.windows(2).all(|w| w[0] != w[1]));
    let layers = (0..p.rows()).map(|j| j * z..(j + 1) * z).collect();
    Ok(LiftedCode::assemble(p.cols() * z, p.rows() * z, z, &edges, layers, Vec::new()))
}

/// Incremental state of [`lift`]. `owner` and `cur` are indexed by local
/// check / variable position inside the permutation being built.
struct PermLifter {
    rng: ChaCha8Rng,
    var_adj: Vec<Vec<usize>>,
    check_adj: Vec<Vec<usize>>,
    owner: Vec<Option<usize>>,
    cur: Vec<usize>,
    /// `(first variable, first check, check of each local variable)` per
    /// finished permutation.
    perms: Vec<(usize, usize, Vec<usize>)>,
    z: usize,
}

impl PermLifter {
    fn connect(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c);
        self.check_adj[c].push(v);
    }

    fn disconnect(&mut self, v: usize, c: usize) {
        self.var_adj[v].retain(|&x| x != c);
        self.check_adj[c].retain(|&x| x != v);
    }

    /// Adding `v - c` would close a 4-cycle.
    fn closes_cycle(&self, v: usize, c: usize) -> bool {
        self.check_adj[c]
            .iter()
            .any(|&u| u != v && self.var_adj[v].iter().any(|&c2| c2 != c && self.check_adj[c2].contains(&u)))
    }

    fn any_cycle(&self) -> bool {
        (0..self.var_adj.len()).any(|v| {
            self.var_adj[v].iter().any(|&c| {
                self.check_adj[c]
                    .iter()
                    .any(|&u| u != v && self.var_adj[v].iter().any(|&c2| c2 != c && self.check_adj[c2].contains(&u)))
            })
        })
    }

    /// 4-cycles that adding `v - c` would close.
    fn cycles_closed(&self, v: usize, c: usize) -> usize {
        self.check_adj[c]
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| {
                self.var_adj[v]
                    .iter()
                    .filter(|&&c2| c2 != c && self.check_adj[c2].contains(&u))
                    .count()
            })
            .sum()
    }

    /// Local search: swaps the checks of two variables of one permutation
    /// whenever that lowers the number of 4-cycles through the two edges.
    fn repair(&mut self) {
        for _ in 0..REPAIR_SWEEPS {
            let mut improved = false;
            for pi in 0..self.perms.len() {
                let (v0, _, mut cur) = self.perms[pi].clone();
                for a in 0..self.z {
                    let (va, ca) = (v0 + a, cur[a]);
                    self.disconnect(va, ca);
                    let bad = self.closes_cycle(va, ca);
                    self.connect(va, ca);
                    if !bad {
                        continue;
                    }
                    let z = self.z;
                    let start = self.rng.gen_range(0..z);
                    for b in (0..z).map(|k| (start + k) % z).filter(|&b| b != a) {
                        let (vb, cb) = (v0 + b, cur[b]);
                        self.disconnect(va, ca);
                        self.disconnect(vb, cb);
                        if !self.var_adj[va].contains(&cb) && !self.var_adj[vb].contains(&ca) {
                            let before = self.cycles_closed(va, ca) + self.cycles_closed(vb, cb);
                            let first = self.cycles_closed(va, cb);
                            self.connect(va, cb);
                            let after = first + self.cycles_closed(vb, ca);
                            // sideways moves let the search leave plateaus
                            if after < before || (after == before && self.rng.gen_bool(SIDEWAYS_PROB)) {
                                self.connect(vb, ca);
                                cur.swap(a, b);
                                improved |= after < before;
                                break;
                            }
                            self.disconnect(va, cb);
                        }
                        self.connect(va, ca);
                        self.connect(vb, cb);
                    }
                }
                self.perms[pi].2 = cur;
            }
            if !improved && !self.any_cycle() {
                break;
            }
        }
    }

    fn permutation(&mut self, row: usize, col: usize) -> Result<()> {
        let z = self.z;
        let (c0, v0) = (row * z, col * z);
        self.owner.iter_mut().for_each(|o| *o = None);
        let mut free: Vec<usize> = (c0..c0 + z).collect();
        let mut vars: Vec<usize> = (v0..v0 + z).collect();
        vars.shuffle(&mut self.rng);
        for &v in &vars {
            let start = self.rng.gen_range(0..free.len());
            let mut pick = None;
            let mut fallback = None;
            for k in (0..free.len()).map(|k| (start + k) % free.len()) {
                let c = free[k];
                if self.var_adj[v].contains(&c) {
                    continue;
                }
                if !self.closes_cycle(v, c) {
                    pick = Some(k);
                    break;
                }
                fallback.get_or_insert(k);
            }
            match pick.or(fallback) {
                Some(k) => {
                    let c = free.swap_remove(k);
                    self.take(v, c, v0, c0);
                }
                None => {
                    let mut seen = vec![false; z];
                    if !self.augment(v, v0, c0, &mut seen) {
                        return Err(Error::Lifting(format!("no simple permutation at Z = {z}")));
                    }
                    free.retain(|&c| self.owner[c - c0].is_none());
                }
            }
        }
        self.perms.push((v0, c0, self.cur.clone()));
        Ok(())
    }

    fn take(&mut self, v: usize, c: usize, v0: usize, c0: usize) {
        self.connect(v, c);
        self.owner[c - c0] = Some(v);
        self.cur[v - v0] = c;
    }

    /// Kuhn augmenting path: places `v` on some check of the row, moving
    /// earlier variables of this permutation along the way.
    fn augment(&mut self, v: usize, v0: usize, c0: usize, seen: &mut [bool]) -> bool {
        for k in 0..self.z {
            let c = c0 + k;
            if seen[k] || self.var_adj[v].contains(&c) {
                continue;
            }
            seen[k] = true;
            match self.owner[k] {
                None => {
                    self.take(v, c, v0, c0);
                    return true;
                }
                Some(u) => {
                    self.disconnect(u, c);
                    self.owner[k] = None;
                    if self.augment(u, v0, c0, seen) {
                        self.take(v, c, v0, c0);
                        return true;
                    }
                    self.take(u, c, v0, c0);
                }
            }
        }
        false
    }
}

fn check_lifting(p: &Protograph, z: usize) -> Result<()> {
    if z == 0 {
        return Err(Error::Lifting("lifting factor must be >= 1".into()));
    }
    let max_mult = *p.entries().iter().max().unwrap_or(&0) as usize;
    if z < max_mult {
        return Err(Error::Lifting(format!(
            "lifting factor {z} is smaller than the largest edge multiplicity {max_mult}"
        )));
    }
    Ok(())
}

/// Quasi-cyclic lift of `p` by factor `z`.
///
/// Circulants are placed in row-major protograph order. Each one tries the
/// shifts `0..z` in a seeded random order and takes the first that is distinct
/// from its parallel siblings and closes no 4-cycle with the circulants placed
/// so far; if every shift closes one, the shift closing the fewest is used.
pub fn lift_circulant(p: &Protograph, z: usize, seed: u64) -> Result<LiftedCode> {
    check_lifting(p, z)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<Circulant> = Vec::with_capacity(p.edge_count() as usize);
    let mut candidates: Vec<usize> = (0..z).collect();
    for j in 0..p.rows() {
        for i in 0..p.cols() {
            for _ in 0..p.get(j, i) {
                candidates.shuffle(&mut rng);
                let mut best: Option<(usize, usize)> = None;
                for &s in &candidates {
                    if placed
                        .iter()
                        .any(|c| c.row == j && c.col == i && c.shift == s)
                    {
                        continue;
                    }
                    let cand = Circulant { row: j, col: i, shift: s };
                    let cycles = four_cycles_through(&placed, cand, z);
                    if best.map_or(true, |(_, b)| cycles < b) {
                        best = Some((s, cycles));
                    }
                    if cycles == 0 {
                        break;
                    }
                }
                let (shift, _) = best.expect("z >= multiplicity leaves a free shift");
                placed.push(Circulant { row: j, col: i, shift });
            }
        }
    }

    let mut edges = Vec::with_capacity(placed.len() * z);
    for c in &placed {
        for r in 0..z {
            edges.push((c.row * z + r, c.col * z + (r + c.shift) % z));
        }
    }
    edges.sort_unstable();
    debug_assert!(edges.windows(2).all(|w| w[0] != w[1]));
    let layers = (0..p.rows()).map(|j| j * z..(j + 1) * z).collect();
    Ok(LiftedCode::assemble(
        p.cols() * z,
        p.rows() * z,
        z,
        &edges,
        layers,
        placed,
    ))
}

/// Closed walks `e1 e2 e3 e4` of circulants (consecutive ones distinct,
/// e1/e2 sharing a column, e2/e3 a row, e3/e4 a column, e4/e1 a row) with
/// `s1 - s2 + s3 - s4 = 0 mod z`, where `e1` is the candidate. Each 4-cycle
/// through the candidate is counted in both directions.
fn four_cycles_through(placed: &[Circulant], cand: Circulant, z: usize) -> usize {
    let pool: Vec<Circulant> = placed.iter().copied().chain(std::iter::once(cand)).collect();
    let cand_idx = pool.len() - 1;
    let zi = z as i64;
    let mut count = 0;
    for (i2, e2) in pool.iter().enumerate() {
        if i2 == cand_idx || e2.col != cand.col {
            continue;
        }
        for (i3, e3) in pool.iter().enumerate() {
            if i3 == i2 || e3.row != e2.row {
                continue;
            }
            for (i4, e4) in pool.iter().enumerate() {
                if i4 == i3 || i4 == cand_idx || e4.col != e3.col || e4.row != cand.row {
                    continue;
                }
                let sum = cand.shift as i64 - e2.shift as i64 + e3.shift as i64 - e4.shift as i64;
                if sum.rem_euclid(zi) == 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Set of `(check, var)` edges, handy for comparing codes.
pub fn edge_set(code: &LiftedCode) -> HashSet<(usize, usize)> {
    code.edges().into_iter().collect()
}

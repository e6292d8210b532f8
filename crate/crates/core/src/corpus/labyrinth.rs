//! Shortest paths through a grid maze. Pather agents spread one cell per
//! round from the start, each carrying the list of steps it took; the first
//! to reach the exit hands its list to a Drawer, which walks back to the
//! start turning the cells it passes into PATH agents.
//!
//! The exit is a Labyrinth agent whose `lp` port carries the state `exit`.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{name, LocatedGraph, NodeId, PSignature, PortGraph, PortRef, Position};
use crate::matching::PortConstraint;
use crate::rewrite::{Rule, RuleBuilder};
use crate::text::RuleFile;

pub const RULES: &str = include_str!("../../corpus/labyrinth.rules");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

pub const DIRS: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

impl Dir {
    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::E => Dir::W,
            Dir::S => Dir::N,
            Dir::W => Dir::E,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// The direction agent recording a step this way.
    pub fn agent(self) -> &'static str {
        ["N", "E", "S", "W"][self.index()]
    }

    fn prev(self) -> &'static str {
        ["n_prev", "e_prev", "s_prev", "w_prev"][self.index()]
    }

    fn next(self) -> &'static str {
        ["n_next", "e_next", "s_next", "w_next"][self.index()]
    }

    fn lab(self) -> &'static str {
        ["ln", "le", "ls", "lw"][self.index()]
    }

    fn visited(self) -> &'static str {
        ["vn", "ve", "vs", "vw"][self.index()]
    }

    fn path(self) -> &'static str {
        ["pn", "pe", "ps", "pw"][self.index()]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Dir::N => (-1, 0),
            Dir::E => (0, 1),
            Dir::S => (1, 0),
            Dir::W => (0, -1),
        }
    }
}

pub fn signature() -> Arc<PSignature> {
    let mut sig = PSignature::new();
    let decls: [(&str, &[&str]); 13] = [
        ("Labyrinth", &["ln", "le", "ls", "lw", "lp"]),
        ("Visited", &["vn", "ve", "vs", "vw", "vp"]),
        ("PATH", &["pn", "pe", "ps", "pw", "pp"]),
        ("Pather", &["pa_pos", "pa_list"]),
        ("Drawer", &["dr_pos", "dr_list"]),
        ("N", &["n_prev", "n_next"]),
        ("E", &["e_prev", "e_next"]),
        ("S", &["s_prev", "s_next"]),
        ("W", &["w_prev", "w_next"]),
        ("Nil", &["nil"]),
        ("cp2", &["c2_in", "c2_a", "c2_b"]),
        ("cp3", &["c3_in", "c3_a", "c3_b", "c3_c"]),
        ("eps", &["eps_in"]),
    ];
    for (n, ports) in decls {
        sig.declare(n, ports.iter().copied()).expect("disjoint ports");
    }
    Arc::new(sig)
}

fn combinations(k: usize) -> Vec<Vec<Dir>> {
    let mut out = Vec::new();
    for mask in 0u8..16 {
        if mask.count_ones() as usize == k {
            out.push(DIRS.iter().copied().filter(|d| mask & (1 << d.index()) != 0).collect::<Vec<_>>());
        }
    }
    // lexicographic over N, E, S, W
    out.sort();
    out
}

/// Split rules in the order they must be tried.
pub fn split_names() -> Vec<String> {
    let mut out = vec!["split4".to_string()];
    for k in [3, 2, 1] {
        for i in 0..combinations(k).len() {
            out.push(format!("split{k}{}", (b'a' + i as u8) as char));
        }
    }
    out
}

fn split(rule: &str, dirs: &[Dir], sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new(rule, sig.clone());
    let p = b.lhs("Pather");
    let x = b.lhs("Labyrinth");
    b.lhs_edge(p, "pa_pos", x, "lp");
    let mut ys = Vec::new();
    for &d in dirs {
        let y = b.lhs("Labyrinth");
        b.lhs_edge(x, d.lab(), y, d.opposite().lab());
        b.constrain(y, "lp", PortConstraint::MustBeFree);
        ys.push(y);
    }
    let nil = (dirs.len() == 4).then(|| {
        let n = b.lhs("Nil");
        b.lhs_edge(p, "pa_list", n, "nil");
        n
    });
    // the cell left behind
    let v = b.rhs("Visited");
    for d in DIRS {
        if !dirs.contains(&d) {
            b.map(x, d.lab(), &[(v, d.visited())]);
        }
    }
    let mut tails = Vec::new();
    for (&d, &y) in dirs.iter().zip(&ys) {
        let y2 = b.rhs("Labyrinth");
        b.copy_state(y2, "lp", y, "lp");
        b.rhs_edge(v, d.visited(), y2, d.opposite().lab());
        for e in DIRS {
            if e != d.opposite() {
                b.map(y, e.lab(), &[(y2, e.lab())]);
            }
        }
        let q = b.rhs("Pather");
        b.rhs_edge(q, "pa_pos", y2, "lp");
        let step = b.rhs(d.agent());
        b.rhs_edge(q, "pa_list", step, d.prev());
        tails.push((step, d.next()));
    }
    match (dirs.len(), nil) {
        (1, _) => {
            b.map(p, "pa_list", &[tails[0]]);
        }
        (4, Some(_)) => {
            for (step, port) in tails {
                let n = b.rhs("Nil");
                b.rhs_edge(step, port, n, "nil");
            }
        }
        (k, _) => {
            let (agent, input, outs): (&str, &str, &[&str]) = if k == 2 {
                ("cp2", "c2_in", &["c2_a", "c2_b"])
            } else {
                ("cp3", "c3_in", &["c3_a", "c3_b", "c3_c"])
            };
            let c = b.rhs(agent);
            for ((step, port), out) in tails.into_iter().zip(outs) {
                b.rhs_edge(step, port, c, out);
            }
            b.map(p, "pa_list", &[(c, input)]);
        }
    }
    b.build().expect("split rule")
}

/// A Pather on the exit becomes a Drawer on a PATH cell.
fn found(sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new("found", sig.clone());
    let p = b.lhs("Pather");
    let x = b.lhs("Labyrinth");
    b.lhs_edge(p, "pa_pos", x, "lp").lhs_state(x, "lp", "exit");
    let cell = b.rhs("PATH");
    let dr = b.rhs("Drawer");
    b.rhs_edge(dr, "dr_pos", cell, "pp");
    for d in DIRS {
        b.map(x, d.lab(), &[(cell, d.path())]);
    }
    b.map(p, "pa_list", &[(dr, "dr_list")]).keep(dr);
    b.build().expect("found rule")
}

/// The Drawer reads the last step `d` and moves back the other way onto
/// the visited cell there, which becomes part of the path.
fn draw(d: Dir, sig: &Arc<PSignature>) -> Rule {
    let back = d.opposite();
    let mut b = RuleBuilder::new(&format!("draw{}", d.agent()), sig.clone());
    let dr = b.lhs("Drawer");
    let z = b.lhs("PATH");
    let step = b.lhs(d.agent());
    let w = b.lhs("Visited");
    b.lhs_edge(dr, "dr_pos", z, "pp")
        .lhs_edge(dr, "dr_list", step, d.prev())
        .lhs_edge(z, back.path(), w, d.visited());
    let z2 = b.rhs("PATH");
    let w2 = b.rhs("PATH");
    let dr2 = b.rhs("Drawer");
    b.rhs_edge(z2, back.path(), w2, d.path()).rhs_edge(dr2, "dr_pos", w2, "pp");
    for e in DIRS {
        if e != back {
            b.map(z, e.path(), &[(z2, e.path())]);
        }
        if e != d {
            b.map(w, e.visited(), &[(w2, e.path())]);
        }
    }
    b.map(step, d.next(), &[(dr2, "dr_list")]).keep(dr2);
    b.build().expect("draw rule")
}

/// The Drawer reached the start: it and the empty list go away.
fn done(sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new("done", sig.clone());
    let dr = b.lhs("Drawer");
    let nil = b.lhs("Nil");
    b.lhs_edge(dr, "dr_list", nil, "nil");
    b.build().expect("done rule")
}

fn copy_ports(k: usize) -> (&'static str, &'static str, &'static [&'static str]) {
    if k == 2 {
        ("cp2", "c2_in", &["c2_a", "c2_b"])
    } else {
        ("cp3", "c3_in", &["c3_a", "c3_b", "c3_c"])
    }
}

/// A copier meeting a direction passes one copy to each output and moves
/// down the list.
fn copy_step(k: usize, d: Dir, sig: &Arc<PSignature>) -> Rule {
    let (agent, input, outs) = copy_ports(k);
    let mut b = RuleBuilder::new(&format!("{agent}{}", d.agent()), sig.clone());
    let c = b.lhs(agent);
    let h = b.lhs(d.agent());
    b.lhs_edge(c, input, h, d.prev());
    let c2 = b.rhs(agent);
    for out in outs {
        let s = b.rhs(d.agent());
        b.rhs_edge(s, d.next(), c2, out);
        b.map(c, out, &[(s, d.prev())]);
    }
    b.map(h, d.next(), &[(c2, input)]).keep(c2);
    b.build().expect("copy rule")
}

fn copy_nil(k: usize, sig: &Arc<PSignature>) -> Rule {
    let (agent, input, outs) = copy_ports(k);
    let mut b = RuleBuilder::new(&format!("{agent}Nil"), sig.clone());
    let c = b.lhs(agent);
    let nil = b.lhs("Nil");
    b.lhs_edge(c, input, nil, "nil");
    for out in outs {
        let n = b.rhs("Nil");
        b.map(c, out, &[(n, "nil")]);
    }
    b.build().expect("copy rule")
}

fn erase_step(d: Dir, sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new(&format!("eps{}", d.agent()), sig.clone());
    let e = b.lhs("eps");
    let h = b.lhs(d.agent());
    b.lhs_edge(e, "eps_in", h, d.prev());
    let e2 = b.rhs("eps");
    b.map(h, d.next(), &[(e2, "eps_in")]).keep(e2);
    b.build().expect("erase rule")
}

fn erase_nil(sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new("epsNil", sig.clone());
    let e = b.lhs("eps");
    let nil = b.lhs("Nil");
    b.lhs_edge(e, "eps_in", nil, "nil");
    b.build().expect("erase rule")
}

/// Lifts a Pather off its cell and sets an eraser on its list.
fn clear(sig: &Arc<PSignature>) -> Rule {
    let mut b = RuleBuilder::new("clear", sig.clone());
    let p = b.lhs("Pather");
    let x = b.lhs("Labyrinth");
    b.lhs_edge(p, "pa_pos", x, "lp");
    let x2 = b.rhs("Labyrinth");
    let e = b.rhs("eps");
    b.copy_state(x2, "lp", x, "lp");
    for d in DIRS {
        b.map(x, d.lab(), &[(x2, d.lab())]);
    }
    b.map(p, "pa_list", &[(e, "eps_in")]).keep(e);
    b.build().expect("clear rule")
}

/// Every labyrinth rule, built directly.
pub fn build_rules() -> RuleFile {
    let sig = signature();
    let mut rules = Vec::new();
    let names = split_names();
    let mut names = names.iter();
    for k in [4, 3, 2, 1] {
        for dirs in combinations(k) {
            rules.push(split(names.next().expect("name per split"), &dirs, &sig));
        }
    }
    rules.push(found(&sig));
    rules.extend(DIRS.iter().map(|&d| draw(d, &sig)));
    rules.push(done(&sig));
    for k in [2, 3] {
        rules.extend(DIRS.iter().map(|&d| copy_step(k, d, &sig)));
        rules.push(copy_nil(k, &sig));
    }
    rules.extend(DIRS.iter().map(|&d| erase_step(d, &sig)));
    rules.push(erase_nil(&sig));
    rules.push(clear(&sig));
    RuleFile { signature: sig, agents: Vec::new(), rules }
}

/// The bundled rule file, which holds the same rules as [`build_rules`].
pub fn rule_file() -> RuleFile {
    crate::text::parse_rules(RULES).expect("bundled labyrinth rules parse")
}

fn orelse(names: &[String]) -> String {
    names.join(" orelse ")
}

fn copy_rule_names() -> Vec<String> {
    let mut out = Vec::new();
    for a in ["cp2", "cp3"] {
        for d in DIRS {
            out.push(format!("{a}{}", d.agent()));
        }
        out.push(format!("{a}Nil"));
    }
    out
}

fn erase_rule_names() -> Vec<String> {
    let mut out: Vec<String> = DIRS.iter().map(|d| format!("eps{}", d.agent())).collect();
    out.push("epsNil".into());
    out
}

/// Search until a Pather stands on the exit, then hand over to a Drawer.
pub fn step1_with(splits: &[String]) -> String {
    format!(
        "while(not(found))do(repeat*({}); property(name==\"Pather\", graph))min(0)max(-1); found",
        orelse(splits)
    )
}

pub fn step1() -> String {
    step1_with(&split_names())
}

/// Resolve pending list copies so every list is a plain chain.
pub fn list_copy() -> String {
    format!("property(name==\"cp2\" or name==\"cp3\", graph); repeat*({})", orelse(&copy_rule_names()))
}

/// Remove the Pathers left over from the search and erase their lists.
pub fn cleanup() -> String {
    format!(
        "property(name==\"Pather\", graph); repeat*(clear); repeat*({})",
        orelse(&erase_rule_names())
    )
}

pub fn step2() -> String {
    "property(name==\"Drawer\", graph); while(not(done))do(drawN orelse drawE orelse drawS orelse drawW)min(0)max(-1); done"
        .to_string()
}

/// The whole program; `tidy` also removes leftover Pathers.
pub fn lab_strat(tidy: bool) -> String {
    let mut parts = vec![step1(), list_copy()];
    if tidy {
        parts.push(cleanup());
    }
    parts.push(step2());
    parts.join("; ")
}

pub type Cell = (usize, usize);

/// A grid maze. `open` holds the passages, each as a pair of neighbouring
/// cells with the smaller one first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maze {
    pub rows: usize,
    pub cols: usize,
    pub open: BTreeSet<(Cell, Cell)>,
    pub start: Cell,
    pub exit: Option<Cell>,
}

impl Maze {
    /// A perfect maze by randomised depth-first search, plus `extra`
    /// random openings in the remaining walls. The start is the top-left
    /// cell and the exit a random other cell.
    pub fn generate(rows: usize, cols: usize, extra: usize, seed: u64) -> Maze {
        assert!(rows > 0 && cols > 0, "empty maze");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut maze = Maze { rows, cols, open: BTreeSet::new(), start: (0, 0), exit: None };
        let mut seen = BTreeSet::from([(0, 0)]);
        let mut stack = vec![(0, 0)];
        while let Some(&c) = stack.last() {
            let mut next: Vec<Cell> = maze.neighbours(c).into_iter().filter(|n| !seen.contains(n)).collect();
            next.shuffle(&mut rng);
            match next.first() {
                Some(&n) => {
                    maze.open(c, n);
                    seen.insert(n);
                    stack.push(n);
                }
                None => {
                    stack.pop();
                }
            }
        }
        let mut walls: Vec<(Cell, Cell)> = maze
            .all_cells()
            .flat_map(|c| maze.neighbours(c).into_iter().map(move |n| (c.min(n), c.max(n))))
            .filter(|w| !maze.open.contains(w))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        walls.shuffle(&mut rng);
        for (a, b) in walls.into_iter().take(extra) {
            maze.open(a, b);
        }
        if rows * cols > 1 {
            let k = rng.gen_range(1..rows * cols);
            maze.exit = Some((k / cols, k % cols));
        } else {
            maze.exit = Some((0, 0));
        }
        maze
    }

    /// A grid with every wall removed.
    pub fn open_grid(rows: usize, cols: usize, exit: Option<Cell>) -> Maze {
        let mut maze = Maze { rows, cols, open: BTreeSet::new(), start: (0, 0), exit };
        for c in maze.all_cells().collect::<Vec<_>>() {
            for n in maze.neighbours(c) {
                maze.open(c, n);
            }
        }
        maze
    }

    pub fn without_exit(mut self) -> Maze {
        self.exit = None;
        self
    }

    pub fn all_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| (r, c)))
    }

    fn step(&self, c: Cell, d: Dir) -> Option<Cell> {
        let (dr, dc) = d.delta();
        let r = c.0.checked_add_signed(dr)?;
        let k = c.1.checked_add_signed(dc)?;
        (r < self.rows && k < self.cols).then_some((r, k))
    }

    fn neighbours(&self, c: Cell) -> Vec<Cell> {
        DIRS.iter().filter_map(|&d| self.step(c, d)).collect()
    }

    pub fn open(&mut self, a: Cell, b: Cell) {
        self.open.insert((a.min(b), a.max(b)));
    }

    pub fn is_open(&self, a: Cell, b: Cell) -> bool {
        self.open.contains(&(a.min(b), a.max(b)))
    }

    /// Cells on a shortest path from start to exit, both included.
    pub fn shortest_path_cells(&self) -> Option<usize> {
        let exit = self.exit?;
        let mut dist = std::collections::BTreeMap::from([(self.start, 1usize)]);
        let mut queue = VecDeque::from([self.start]);
        while let Some(c) = queue.pop_front() {
            if c == exit {
                return Some(dist[&c]);
            }
            for n in self.neighbours(c) {
                if self.is_open(c, n) && !dist.contains_key(&n) {
                    dist.insert(n, dist[&c] + 1);
                    queue.push_back(n);
                }
            }
        }
        None
    }

    pub fn cell_id(&self, c: Cell) -> NodeId {
        NodeId((c.0 * self.cols + c.1) as u64 + 1)
    }

    /// The maze as a located graph with a Pather holding an empty list on
    /// the start cell. Only the Pather is in the position.
    pub fn to_graph(&self) -> LocatedGraph {
        let mut g = PortGraph::new(signature());
        for c in self.all_cells() {
            g.add_node(self.cell_id(c), "Labyrinth").expect("declared");
        }
        for &(a, b) in &self.open {
            let d = if a.0 == b.0 { Dir::E } else { Dir::S };
            g.connect(PortRef::new(self.cell_id(a), d.lab()), PortRef::new(self.cell_id(b), d.opposite().lab()))
                .expect("free ports");
        }
        if let Some(x) = self.exit {
            g.set_state(&PortRef::new(self.cell_id(x), "lp"), Some(name("exit"))).expect("lp");
        }
        let n = (self.rows * self.cols) as u64;
        let (pather, nil) = (NodeId(n + 1), NodeId(n + 2));
        g.add_node(pather, "Pather").expect("declared");
        g.add_node(nil, "Nil").expect("declared");
        g.connect(PortRef::new(pather, "pa_pos"), PortRef::new(self.cell_id(self.start), "lp")).expect("free");
        g.connect(PortRef::new(pather, "pa_list"), PortRef::new(nil, "nil")).expect("free");
        LocatedGraph::new(g, Position::from([pather]))
    }
}

/// Number of PATH agents in a graph.
pub fn path_cells(g: &PortGraph) -> usize {
    g.nodes_named("PATH").count()
}

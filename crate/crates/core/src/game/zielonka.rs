use super::{GameArena, Player, Strategy};

/// A max-parity game: I wins an infinite play iff the largest priority seen
/// infinitely often is even. A player without moves loses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl ParityGame {
    pub fn from_arena(a: &GameArena) -> Self {
        ParityGame {
            owner: (0..a.len()).map(|i| a.player(i)).collect(),
            priority: (0..a.len()).map(|i| a.priority(i)).collect(),
            succ: (0..a.len()).map(|i| a.moves(i).to_vec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    /// Winning moves of I on I's region (positions with moves only).
    pub strategy_i: Strategy,
    pub strategy_ii: Strategy,
}

impl Solution {
    pub fn strategy(&self, p: Player) -> &Strategy {
        match p {
            Player::I => &self.strategy_i,
            Player::II => &self.strategy_ii,
        }
    }

    pub fn region(&self, p: Player) -> Vec<usize> {
        (0..self.winner.len())
            .filter(|&i| self.winner[i] == p)
            .collect()
    }
}

struct Solver<'g> {
    g: &'g ParityGame,
    pred: Vec<Vec<usize>>,
}

struct Partial {
    winner: Vec<Option<Player>>,
    strat: Vec<Option<usize>>,
}

impl Solver<'_> {
    /// Nodes of `mask` from which `player` can force a visit to `target`,
    /// with the attracting moves.
    fn attractor(
        &self,
        mask: &[bool],
        target: &[usize],
        player: Player,
    ) -> (Vec<bool>, Vec<Option<usize>>) {
        let n = self.g.len();
        let mut attr = vec![false; n];
        let mut strat = vec![None; n];
        let mut count: Vec<usize> = (0..n)
            .map(|v| {
                if mask[v] {
                    self.g.succ[v].iter().filter(|&&s| mask[s]).count()
                } else {
                    0
                }
            })
            .collect();
        let mut queue: Vec<usize> = Vec::new();
        for &t in target {
            if !attr[t] {
                attr[t] = true;
                queue.push(t);
            }
        }
        while let Some(u) = queue.pop() {
            for &v in &self.pred[u] {
                if !mask[v] || attr[v] {
                    continue;
                }
                if self.g.owner[v] == player {
                    attr[v] = true;
                    strat[v] = Some(u);
                    queue.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        (attr, strat)
    }

    fn solve(&self, mask: &[bool]) -> Partial {
        let n = self.g.len();
        let mut out = Partial {
            winner: vec![None; n],
            strat: vec![None; n],
        };
        let Some(d) = (0..n)
            .filter(|&v| mask[v])
            .map(|v| self.g.priority[v])
            .max()
        else {
            return out;
        };
        let p = Player::of_priority(d);
        let top: Vec<usize> = (0..n)
            .filter(|&v| mask[v] && self.g.priority[v] == d)
            .collect();
        let (a, sa) = self.attractor(mask, &top, p);
        let sub: Vec<bool> = (0..n).map(|v| mask[v] && !a[v]).collect();
        let first = self.solve(&sub);
        let opp_region: Vec<usize> = (0..n)
            .filter(|&v| first.winner[v] == Some(p.opponent()))
            .collect();
        if opp_region.is_empty() {
            for v in (0..n).filter(|&v| mask[v]) {
                out.winner[v] = Some(p);
                if self.g.owner[v] != p {
                    continue;
                }
                out.strat[v] = if sub[v] {
                    first.strat[v]
                } else if sa[v].is_some() {
                    sa[v]
                } else {
                    self.g.succ[v].iter().copied().find(|&s| mask[s])
                };
            }
            return out;
        }
        let (b, sb) = self.attractor(mask, &opp_region, p.opponent());
        let rest: Vec<bool> = (0..n).map(|v| mask[v] && !b[v]).collect();
        let second = self.solve(&rest);
        for v in (0..n).filter(|&v| mask[v]) {
            if b[v] {
                out.winner[v] = Some(p.opponent());
                if self.g.owner[v] == p.opponent() {
                    out.strat[v] = if first.winner[v] == Some(p.opponent()) {
                        first.strat[v]
                    } else {
                        sb[v]
                    };
                }
            } else {
                out.winner[v] = second.winner[v];
                out.strat[v] = second.strat[v];
            }
        }
        out
    }
}

/// Solves a max-parity game by recursive attractor decomposition.
pub fn solve_parity(game: &ParityGame) -> Solution {
    let n = game.len();
    // dead ends move to a sink won by the opponent of their owner
    let mut g = game.clone();
    let (sink_i, sink_ii) = (n, n + 1);
    g.owner.extend([Player::I, Player::I]);
    g.priority.extend([0, 1]);
    g.succ.extend([vec![sink_i], vec![sink_ii]]);
    for v in 0..n {
        if g.succ[v].is_empty() {
            g.succ[v].push(if g.owner[v] == Player::I {
                sink_ii
            } else {
                sink_i
            });
        }
    }
    let mut pred = vec![Vec::new(); n + 2];
    for (v, ss) in g.succ.iter().enumerate() {
        for &s in ss {
            pred[s].push(v);
        }
    }
    let solver = Solver { g: &g, pred };
    let part = solver.solve(&vec![true; n + 2]);
    let mut sol = Solution {
        winner: Vec::with_capacity(n),
        strategy_i: Strategy::default(),
        strategy_ii: Strategy::default(),
    };
    for v in 0..n {
        let w = part.winner[v].expect("every node is assigned");
        sol.winner.push(w);
        if game.owner[v] == w && !game.succ[v].is_empty() {
            let s = part.strat[v].expect("winner has a move");
            match w {
                Player::I => sol.strategy_i.choice.insert(v, s),
                Player::II => sol.strategy_ii.choice.insert(v, s),
            };
        }
    }
    sol
}

pub fn solve(a: &GameArena) -> Solution {
    solve_parity(&ParityGame::from_arena(a))
}

use super::{GameArena, GameError, Player, Strategy};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// Checks that `sigma` wins for `player` from every position in `from`.
///
/// In the graph where `player` follows `sigma` and the opponent moves
/// freely, no reachable dead end may belong to `player`, and no reachable
/// cycle may have a maximal priority favouring the opponent.
pub fn verify_strategy(
    a: &GameArena,
    player: Player,
    sigma: &Strategy,
    from: &[usize],
) -> Result<bool, GameError> {
    let n = a.len();
    let mut reach = vec![false; n];
    let mut stack: Vec<usize> = from.to_vec();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &s in from {
        reach[s] = true;
    }
    while let Some(v) = stack.pop() {
        let next: Vec<usize> = if a.player(v) == player {
            if a.moves(v).is_empty() {
                return Ok(false);
            }
            let to = sigma.get(v).ok_or(GameError::IncompleteStrategy(v))?;
            if !a.moves(v).contains(&to) {
                return Err(GameError::IllegalMove { from: v, to });
            }
            vec![to]
        } else {
            a.moves(v).to_vec()
        };
        for u in next {
            edges.push((v, u));
            if !reach[u] {
                reach[u] = true;
                stack.push(u);
            }
        }
    }
    let mut bad: Vec<u32> = (0..n)
        .filter(|&v| reach[v] && Player::of_priority(a.priority(v)) != player)
        .map(|v| a.priority(v))
        .collect();
    bad.sort_unstable();
    bad.dedup();
    for p in bad {
        let mut g: DiGraph<usize, ()> = DiGraph::new();
        let mut node = vec![None; n];
        for v in (0..n).filter(|&v| reach[v] && a.priority(v) <= p) {
            node[v] = Some(g.add_node(v));
        }
        for &(u, v) in &edges {
            if let (Some(x), Some(y)) = (node[u], node[v]) {
                g.add_edge(x, y, ());
            }
        }
        for scc in tarjan_scc(&g) {
            let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
            if cyclic && scc.iter().any(|&x| a.priority(g[x]) == p) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::{build_arena, solve};
    use super::*;
    use crate::model::{close, ClosureOptions, LogicVariant, ModelDocument};
    use crate::syntax::{analyze, parse};

    fn arena(json: &str, f: &str) -> GameArena {
        let m = close(
            &ModelDocument::from_json(json).unwrap(),
            ClosureOptions::all(),
            LogicVariant::CK,
        )
        .unwrap();
        build_arena(&m, &analyze(&parse(f).unwrap()).unwrap(), 0).unwrap()
    }

    #[test]
    fn solver_strategies_verify() {
        let a = arena(
            r#"{"worlds":["w","v"],"pre":[["w","v"]],"rel":[["v","w"],["w","w"]],"val":{"p":["v"]}}"#,
            "nu X. (p -> <>X) & mu Y. []Y | p",
        );
        let sol = solve(&a);
        for p in [Player::I, Player::II] {
            assert!(verify_strategy(&a, p, sol.strategy(p), &sol.region(p)).unwrap());
        }
    }

    #[test]
    fn losing_choice_rejected() {
        // V must pick the true disjunct
        let a = arena(r#"{"worlds":["w"],"val":{"p":["w"],"q":[]}}"#, "q | p");
        let sol = solve(&a);
        assert_eq!(sol.winner[0], Player::I);
        let good = sol.strategy_i.get(0).unwrap();
        let bad = *a.moves(0).iter().find(|&&s| s != good).unwrap();
        let mut sigma = sol.strategy_i.clone();
        sigma.choice.insert(0, bad);
        assert!(!verify_strategy(&a, Player::I, &sigma, &[0]).unwrap());
    }

    #[test]
    fn losing_cycle_rejected() {
        // I as V cannot win mu X. <>X on a loop, and any strategy cycles on μ
        let a = arena(r#"{"worlds":["w"],"rel":[["w","w"]]}"#, "mu X. <>X");
        let sol = solve(&a);
        assert_eq!(sol.winner[0], Player::II);
        let mut sigma = Strategy::default();
        for v in 0..a.len() {
            if a.player(v) == Player::I {
                sigma.choice.insert(v, a.moves(v)[0]);
            }
        }
        assert!(!verify_strategy(&a, Player::I, &sigma, &[0]).unwrap());
    }

    #[test]
    fn empty_region_vacuous_and_missing_moves_reported() {
        let a = arena(r#"{"worlds":["w"],"val":{"p":["w"],"q":[]}}"#, "q | p");
        assert!(verify_strategy(&a, Player::II, &Strategy::default(), &[]).unwrap());
        assert_eq!(
            verify_strategy(&a, Player::I, &Strategy::default(), &[0]),
            Err(GameError::IncompleteStrategy(0))
        );
    }
}

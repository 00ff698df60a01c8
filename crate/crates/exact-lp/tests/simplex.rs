use exact_lp::{
    add_constraint_and_resolve, int, ratio, solve, Constraint, LinearProgram, LpError, LpSession, Rational, Relation,
    SolveStatus, VarId, VertexSolution,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn optimal(lp: &LinearProgram) -> VertexSolution {
    match solve(lp).unwrap() {
        SolveStatus::Optimal(v) => v,
        other => panic!("expected optimal, got {other:?}"),
    }
}

fn row(terms: &[(VarId, i64)]) -> Vec<(VarId, Rational)> {
    terms.iter().map(|&(v, a)| (v, int(a))).collect()
}

/// Rank of a rational matrix by exact Gaussian elimination.
fn rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                let pivot_row = m[r].clone();
                for (a, b) in m[i][c..cols].iter_mut().zip(&pivot_row[c..cols]) {
                    *a -= &f * b;
                }
            }
        }
        r += 1;
    }
    r
}

/// Rows of all constraints (including sign restrictions) tight at `values`.
fn tight_rows(lp: &LinearProgram, values: &[Rational]) -> Vec<Vec<Rational>> {
    let n = lp.num_vars();
    let mut rows = Vec::new();
    for c in lp.constraints() {
        if c.lhs_at(values) == c.rhs {
            let mut dense = vec![Rational::zero(); n];
            for (v, a) in &c.terms {
                dense[v.0] += a;
            }
            rows.push(dense);
        }
    }
    for (j, var) in lp.vars().iter().enumerate() {
        if var.nonnegative && values[j].is_zero() {
            let mut dense = vec![Rational::zero(); n];
            dense[j] = int(1);
            rows.push(dense);
        }
    }
    rows
}

fn assert_vertex(lp: &LinearProgram, v: &VertexSolution) {
    assert!(lp.is_feasible(&v.values), "solution violates a constraint");
    assert_eq!(v.objective_value, lp.objective_at(&v.values));
    assert_eq!(rank(tight_rows(lp, &v.values)), lp.num_vars(), "not a vertex");
}

#[test]
fn equality_pins_value() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.set_cost(x, int(1));
    lp.add_constraint(Constraint::new(row(&[(x, 1)]), Relation::Eq, int(1)));
    let v = optimal(&lp);
    assert_eq!(v.values, vec![int(1)]);
    assert_eq!(v.objective_value, int(1));
}

#[test]
fn unbounded_ray_is_reported() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.set_cost(x, int(-1));
    assert_eq!(solve(&lp).unwrap(), SolveStatus::Unbounded);
}

#[test]
fn infeasible_system_is_reported() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.add_constraint(Constraint::new(row(&[(x, 1)]), Relation::Le, int(1)));
    lp.add_constraint(Constraint::new(row(&[(x, 1)]), Relation::Ge, int(2)));
    assert_eq!(solve(&lp).unwrap(), SolveStatus::Infeasible);
}

#[test]
fn undeclared_variable_is_malformed() {
    let mut lp = LinearProgram::new();
    lp.add_var("x", true);
    lp.add_constraint(Constraint::new(row(&[(VarId(3), 1)]), Relation::Le, int(1)));
    assert!(matches!(solve(&lp), Err(LpError::MalformedProgram(_))));
}

/// Vertices of the square-cut polygon, found by intersecting every pair of
/// boundary lines.
fn polygon_vertices() -> Vec<(Rational, Rational)> {
    // a*x + b*y = c for: x+y=3/2, x=1, y=1, x=0, y=0
    let lines = [
        (int(1), int(1), ratio(3, 2)),
        (int(1), int(0), int(1)),
        (int(0), int(1), int(1)),
        (int(1), int(0), int(0)),
        (int(0), int(1), int(0)),
    ];
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = &lines[i];
            let (a2, b2, c2) = &lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / &det;
            let y = (a1 * c2 - a2 * c1) / &det;
            let feasible = &x + &y >= ratio(3, 2) && x <= int(1) && y <= int(1) && !x.is_negative() && !y.is_negative();
            if feasible && !out.contains(&(x.clone(), y.clone())) {
                out.push((x, y));
            }
        }
    }
    out
}

#[test]
fn polygon_optimum_is_a_vertex_at_a_bound() {
    let vertices = polygon_vertices();
    assert_eq!(vertices.len(), 3);
    let best = vertices.iter().map(|(x, y)| x + y).min().unwrap();
    assert_eq!(best, ratio(3, 2));

    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let y = lp.add_var("y", true);
    lp.set_cost(x, int(1));
    lp.set_cost(y, int(1));
    lp.add_constraint(Constraint::new(row(&[(x, 1), (y, 1)]), Relation::Ge, ratio(3, 2)));
    lp.add_constraint(Constraint::new(row(&[(x, 1)]), Relation::Le, int(1)));
    lp.add_constraint(Constraint::new(row(&[(y, 1)]), Relation::Le, int(1)));
    let v = optimal(&lp);
    assert_eq!(v.objective_value, best);
    let point = (v.values[0].clone(), v.values[1].clone());
    assert!(vertices.contains(&point));
    // Bland's rule enters x first, so x reaches its bound.
    assert_eq!(point, (int(1), ratio(1, 2)));
    assert_vertex(&lp, &v);
}

#[test]
fn tightening_cut_moves_the_optimum() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    lp.set_cost(x, int(-1));
    lp.add_constraint(Constraint::new(row(&[(x, 1)]), Relation::Le, int(2)));
    let prior = optimal(&lp);
    assert_eq!(prior.values, vec![int(2)]);

    let slack_cut = Constraint::new(row(&[(x, 1)]), Relation::Le, int(3));
    assert_eq!(add_constraint_and_resolve(&mut lp.clone(), &prior, slack_cut), Err(LpError::CutNotViolated));

    let cut = Constraint::new(row(&[(x, 1)]), Relation::Le, int(1));
    let next = add_constraint_and_resolve(&mut lp, &prior, cut).unwrap();
    let SolveStatus::Optimal(next) = next else { panic!() };
    assert_eq!(next.values, vec![int(1)]);
    assert_eq!(lp.constraints().len(), 2);
}

/// Beale's example cycles under the textbook largest-coefficient rule.
#[test]
fn bland_rule_terminates_on_beale_cycling_example() {
    let mut lp = LinearProgram::new();
    let x: Vec<VarId> = (4..=7).map(|i| lp.add_var(format!("x{i}"), true)).collect();
    lp.set_cost(x[0], ratio(-3, 4));
    lp.set_cost(x[1], int(20));
    lp.set_cost(x[2], ratio(-1, 2));
    lp.set_cost(x[3], int(6));
    lp.add_constraint(Constraint::new(
        vec![(x[0], ratio(1, 4)), (x[1], int(-8)), (x[2], int(-1)), (x[3], int(9))],
        Relation::Le,
        int(0),
    ));
    lp.add_constraint(Constraint::new(
        vec![(x[0], ratio(1, 2)), (x[1], int(-12)), (x[2], ratio(-1, 2)), (x[3], int(3))],
        Relation::Le,
        int(0),
    ));
    lp.add_constraint(Constraint::new(row(&[(x[2], 1)]), Relation::Le, int(1)));
    let v = optimal(&lp);
    assert_eq!(v.objective_value, ratio(-5, 4));
    assert_eq!(v.values, vec![int(1), int(0), int(1), int(0)]);
    assert_vertex(&lp, &v);
}

#[test]
fn redundant_equalities_are_tolerated() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let y = lp.add_var("y", true);
    lp.set_cost(x, int(2));
    lp.set_cost(y, int(1));
    lp.add_constraint(Constraint::new(row(&[(x, 1), (y, 1)]), Relation::Eq, int(2)));
    lp.add_constraint(Constraint::new(row(&[(x, 2), (y, 2)]), Relation::Eq, int(4)));
    let v = optimal(&lp);
    assert_eq!(v.values, vec![int(0), int(2)]);
    assert_eq!(v.basis.len(), 1);
}

#[test]
fn free_variables_are_split() {
    let mut lp = LinearProgram::new();
    let w = lp.add_var("w", false);
    lp.set_cost(w, int(1));
    lp.add_constraint(Constraint::new(row(&[(w, 1)]), Relation::Ge, int(-3)));
    let v = optimal(&lp);
    assert_eq!(v.values, vec![int(-3)]);
}

/// Exhaustive separation of subtour constraints on K4, used to drive a
/// cutting-plane loop through `add_constraint_and_resolve`.
fn most_violated_subtour(edges: &[(usize, usize)], vars: &[VarId], values: &[Rational]) -> Option<Constraint> {
    let mut best: Option<(Rational, u32)> = None;
    for mask in 1u32..(1 << 4) - 1 {
        let size = mask.count_ones() as i64;
        if size < 2 {
            continue;
        }
        let inside: Rational = edges
            .iter()
            .zip(vars)
            .filter(|((u, v), _)| mask >> u & 1 == 1 && mask >> v & 1 == 1)
            .map(|(_, var)| values[var.0].clone())
            .sum();
        let excess = inside - int(size - 1);
        if excess.is_positive() && best.as_ref().is_none_or(|(b, _)| excess > *b) {
            best = Some((excess, mask));
        }
    }
    best.map(|(_, mask)| subtour_row(edges, vars, mask))
}

fn subtour_row(edges: &[(usize, usize)], vars: &[VarId], mask: u32) -> Constraint {
    let terms = edges
        .iter()
        .zip(vars)
        .filter(|((u, v), _)| mask >> u & 1 == 1 && mask >> v & 1 == 1)
        .map(|(_, var)| (*var, int(1)))
        .collect();
    Constraint::new(terms, Relation::Le, int(mask.count_ones() as i64 - 1))
}

#[test]
fn subtour_cutting_plane_loop_matches_cold_full_solve() {
    // K4 whose cheap edges form the triangle {0,1,2}.
    let edges = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)];
    let costs = [1, 1, 1, 5, 6, 7];
    let mut lp = LinearProgram::new();
    let vars: Vec<VarId> = (0..edges.len()).map(|i| lp.add_var(format!("x{i}"), true)).collect();
    for (v, c) in vars.iter().zip(costs) {
        lp.set_cost(*v, int(c));
    }
    lp.add_constraint(Constraint::new(vars.iter().map(|v| (*v, int(1))).collect(), Relation::Eq, int(3)));

    let mut full = lp.clone();
    let mut current = optimal(&lp);
    let mut rounds = 0;
    while let Some(cut) = most_violated_subtour(&edges, &vars, &current.values) {
        let before = current.objective_value.clone();
        current = add_constraint_and_resolve(&mut lp, &current, cut).unwrap().optimal().unwrap();
        assert!(current.objective_value >= before);
        rounds += 1;
        assert!(rounds < 20);
    }
    assert!(current.values.iter().all(|v| v.is_zero() || *v == int(1)));

    for mask in 1u32..(1 << 4) - 1 {
        if mask.count_ones() >= 2 {
            full.add_constraint(subtour_row(&edges, &vars, mask));
        }
    }
    let cold = optimal(&full);
    assert_eq!(cold.objective_value, current.objective_value);
    assert_eq!(current.objective_value, int(7));
    assert_vertex(&lp, &current);
}

#[test]
fn dump_round_trips() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", true);
    let w = lp.add_var("w", false);
    lp.set_cost(x, ratio(3, 2));
    lp.set_cost(w, int(-1));
    lp.add_constraint(Constraint::new(vec![(x, int(1)), (w, ratio(-2, 3))], Relation::Le, ratio(5, 2)));
    lp.add_constraint(Constraint::new(vec![(w, int(1))], Relation::Ge, int(-4)));
    lp.add_constraint(Constraint::new(vec![], Relation::Eq, int(0)));
    let text = lp.to_text();
    assert_eq!(text, "var x >= 0\nvar w free\nmin: 3/2 x + -1 w\nc0: 1 x + -2/3 w <= 5/2\nc1: 1 w >= -4\nc2: 0 = 0\n");
    assert_eq!(LinearProgram::from_text(&text).unwrap(), lp);
}

// ---------------------------------------------------------------------------
// Randomized comparison against brute-force vertex enumeration.

#[derive(Debug, Clone)]
struct SmallLp {
    costs: Vec<i64>,
    rows: Vec<(Vec<i64>, u8, i64)>,
}

fn small_lp() -> impl Strategy<Value = SmallLp> {
    (2usize..=3).prop_flat_map(|n| {
        (
            proptest::collection::vec(-5i64..=5, n),
            proptest::collection::vec((proptest::collection::vec(-3i64..=3, n), 0u8..3, -4i64..=8), 1..=4),
        )
            .prop_map(|(costs, rows)| SmallLp { costs, rows })
    })
}

fn to_program(s: &SmallLp) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let vars: Vec<VarId> = (0..s.costs.len()).map(|i| lp.add_var(format!("v{i}"), true)).collect();
    for (v, c) in vars.iter().zip(&s.costs) {
        lp.set_cost(*v, int(*c));
    }
    for (coefs, rel, rhs) in &s.rows {
        let relation = [Relation::Le, Relation::Eq, Relation::Ge][*rel as usize];
        let terms = vars.iter().zip(coefs).map(|(v, a)| (*v, int(*a))).collect();
        lp.add_constraint(Constraint::new(terms, relation, int(*rhs)));
    }
    // Box keeps every instance bounded.
    for v in &vars {
        lp.add_constraint(Constraint::new(vec![(*v, int(1))], Relation::Le, int(6)));
    }
    lp
}

/// Solves `a x = b` for square `a`; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                let pivot_row = a[c].clone();
                for (x, y) in a[i][c..n].iter_mut().zip(&pivot_row[c..n]) {
                    *x -= &f * y;
                }
                let d = &f * &b[c];
                b[i] -= d;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Minimum objective over all basic feasible points, or `None` if infeasible.
fn brute_force_optimum(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.num_vars();
    let mut hyperplanes: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in lp.constraints() {
        let mut dense = vec![Rational::zero(); n];
        for (v, a) in &c.terms {
            dense[v.0] += a;
        }
        hyperplanes.push((dense, c.rhs.clone()));
    }
    for j in 0..n {
        let mut dense = vec![Rational::zero(); n];
        dense[j] = int(1);
        hyperplanes.push((dense, int(0)));
    }
    let k = hyperplanes.len();
    let mut best: Option<Rational> = None;
    let mut pick = vec![0usize; n];
    fn rec(start: usize, depth: usize, pick: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if depth == pick.len() {
            f(pick);
            return;
        }
        for i in start..k {
            pick[depth] = i;
            rec(i + 1, depth + 1, pick, k, f);
        }
    }
    rec(0, 0, &mut pick, k, &mut |sel| {
        let a = sel.iter().map(|&i| hyperplanes[i].0.clone()).collect();
        let b = sel.iter().map(|&i| hyperplanes[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.is_feasible(&x) {
                let obj = lp.objective_at(&x);
                if best.as_ref().is_none_or(|b| obj < *b) {
                    best = Some(obj);
                }
            }
        }
    });
    best
}

proptest! {
    #[test]
    fn matches_vertex_enumeration(s in small_lp()) {
        let lp = to_program(&s);
        let expected = brute_force_optimum(&lp);
        match solve(&lp).unwrap() {
            SolveStatus::Optimal(v) => {
                assert_vertex(&lp, &v);
                prop_assert_eq!(Some(v.objective_value.clone()), expected);
                prop_assert_eq!(solve(&lp).unwrap(), SolveStatus::Optimal(v));
            }
            SolveStatus::Infeasible => prop_assert_eq!(expected, None),
            SolveStatus::Unbounded => prop_assert!(false, "boxed program reported unbounded"),
        }
    }

    #[test]
    fn text_dump_parses_back(s in small_lp()) {
        let lp = to_program(&s);
        prop_assert_eq!(LinearProgram::from_text(&lp.to_text()).unwrap(), lp);
    }

    #[test]
    fn session_agrees_with_cold_solves(s in small_lp(), extra in proptest::collection::vec(
        (proptest::collection::vec(-3i64..=3, 3), 0u8..3, -4i64..=8), 1..=4)) {
        let full = to_program(&s);
        let n = full.num_vars();
        // Start from the box rows only, then add the random rows one at a time.
        let mut base = LinearProgram::new();
        for v in full.vars() {
            base.add_var(v.name.clone(), v.nonnegative);
        }
        for (v, c) in full.objective_terms() {
            base.set_cost(*v, c.clone());
        }
        let random_rows = full.constraints().len() - n;
        for c in &full.constraints()[random_rows..] {
            base.add_constraint(c.clone());
        }
        let mut session = LpSession::new(base).unwrap();
        let mut rows: Vec<Constraint> = full.constraints()[..random_rows].to_vec();
        for (coefs, rel, rhs) in &extra {
            let terms = (0..n).map(|j| (VarId(j), int(coefs[j]))).collect();
            rows.push(Constraint::new(terms, [Relation::Le, Relation::Eq, Relation::Ge][*rel as usize], int(*rhs)));
        }
        for row in rows {
            let warm = session.add_constraint(row).unwrap().clone();
            let cold = solve(session.program()).unwrap();
            match (&warm, &cold) {
                (SolveStatus::Optimal(w), SolveStatus::Optimal(c)) => {
                    prop_assert_eq!(&w.objective_value, &c.objective_value);
                    prop_assert!(session.program().is_feasible(&w.values));
                    assert_vertex(session.program(), w);
                }
                _ => prop_assert_eq!(warm, cold),
            }
        }
    }
}

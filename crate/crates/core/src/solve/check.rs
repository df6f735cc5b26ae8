use crate::ground::{AtomId, GroundProgram, GroundRule};

/// True iff `candidate` is an answer set of the regular rules of `gp` plus
/// the CR rules listed in `applied` (by rule index).
///
/// The candidate must be consistent and a model of the program; it is stable
/// iff it equals the least model of the reduct whose disjunctive heads are
/// restricted to the candidate. For complementary-pair heads this matches
/// minimal-model semantics: a subset model cannot use the absent complement.
pub fn is_answer_set_with(gp: &GroundProgram, candidate: &[AtomId], applied: &[usize]) -> bool {
    let n = gp.atom_count();
    let mut m = vec![false; n];
    for &a in candidate {
        if a as usize >= n {
            return false;
        }
        m[a as usize] = true;
    }
    for a in 0..n {
        if m[a] {
            if let Some(c) = gp.complement(a as AtomId) {
                if m[c as usize] {
                    return false;
                }
            }
        }
    }
    let active = |i: usize, r: &GroundRule| !r.is_cr() || applied.contains(&i);
    let holds = |v: &[bool], r: &GroundRule| r.pos.iter().all(|&a| v[a as usize]) && r.neg.iter().all(|&a| !m[a as usize]);
    // model check
    for (i, r) in gp.rules.iter().enumerate() {
        if active(i, r) && holds(&m, r) && !r.head.iter().any(|&h| m[h as usize]) {
            return false;
        }
    }
    least_model_matches(gp, &m, |i, r| active(i, r))
}

pub fn is_answer_set(gp: &GroundProgram, candidate: &[AtomId]) -> bool {
    is_answer_set_with(gp, candidate, &[])
}

/// Least model of the reduct w.r.t. `m` (heads restricted to `m`) equals `m`.
pub(crate) fn least_model_matches(
    gp: &GroundProgram,
    m: &[bool],
    active: impl Fn(usize, &GroundRule) -> bool,
) -> bool {
    let n = gp.atom_count();
    // Reduct rules: (head in m, positive body).
    let mut rules: Vec<(AtomId, &[AtomId])> = Vec::new();
    for (i, r) in gp.rules.iter().enumerate() {
        if !active(i, r) || r.neg.iter().any(|&a| m[a as usize]) {
            continue;
        }
        if let Some(&h) = r.head.iter().find(|&&h| m[h as usize]) {
            rules.push((h, &r.pos));
        }
    }
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut missing: Vec<usize> = Vec::with_capacity(rules.len());
    let mut derived = vec![false; n];
    let mut queue: Vec<AtomId> = Vec::new();
    for (k, (h, pos)) in rules.iter().enumerate() {
        let mut distinct = pos.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        for &a in &distinct {
            watch[a as usize].push(k);
        }
        missing.push(distinct.len());
        if distinct.is_empty() && !derived[*h as usize] {
            derived[*h as usize] = true;
            queue.push(*h);
        }
    }
    while let Some(a) = queue.pop() {
        for &k in &watch[a as usize] {
            missing[k] -= 1;
            if missing[k] == 0 {
                let h = rules[k].0 as usize;
                if !derived[h] {
                    derived[h] = true;
                    queue.push(h as AtomId);
                }
            }
        }
    }
    derived == m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ground;
    use crate::lang::{parse_program, Atom, Literal};

    fn ids(gp: &GroundProgram, names: &[&str]) -> Vec<AtomId> {
        names
            .iter()
            .map(|n| {
                let (neg, n) = match n.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, *n),
                };
                gp.lookup(&Literal {
                    atom: Atom::ground(n, &[]),
                    neg,
                })
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn reduct_examples() {
        let gp = ground(&parse_program("a :- not b.").unwrap()).unwrap();
        assert!(is_answer_set(&gp, &ids(&gp, &["a"])));
        assert!(!is_answer_set(&gp, &ids(&gp, &["a", "b"])));
        assert!(!is_answer_set(&gp, &[]));
        let empty = GroundProgram::new();
        assert!(is_answer_set(&empty, &[]));
    }

    #[test]
    fn complementary_disjunction() {
        let gp = ground(&parse_program("a | -a.").unwrap()).unwrap();
        assert!(is_answer_set(&gp, &ids(&gp, &["a"])));
        assert!(is_answer_set(&gp, &ids(&gp, &["-a"])));
        assert!(!is_answer_set(&gp, &ids(&gp, &["a", "-a"])));
        assert!(!is_answer_set(&gp, &[]));
    }

    #[test]
    fn applied_cr_rules_count() {
        let gp = ground(&parse_program(":- not q. q +- .").unwrap()).unwrap();
        let q = ids(&gp, &["q"]);
        assert!(!is_answer_set(&gp, &q));
        let cr = gp.cr_rules().next().unwrap().0;
        assert!(is_answer_set_with(&gp, &q, &[cr]));
    }
}

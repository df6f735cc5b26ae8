use std::collections::{BTreeSet, HashMap};

use super::{LangError, Result, Term};

/// Sorts, subsort edges and sorted instances.
///
/// Instances keep declaration order; membership is the reflexive-transitive
/// closure of the subsort edges. Instances are usually plain names, but
/// generated programs also use compound terms (reified fluents and actions).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortHierarchy {
    sorts: Vec<String>,
    edges: Vec<(String, String)>,
    instances: Vec<(Term, String)>,
}

impl SortHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sorts(&self) -> &[String] {
        &self.sorts
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn instances(&self) -> &[(Term, String)] {
        &self.instances
    }

    pub fn has_sort(&self, sort: &str) -> bool {
        self.sorts.iter().any(|s| s == sort)
    }

    pub fn add_sort(&mut self, sort: &str) {
        if !self.has_sort(sort) {
            self.sorts.push(sort.to_string());
        }
    }

    /// Adds `child ⊆ parent`; rejects unknown sorts and cycles.
    pub fn add_subsort(&mut self, child: &str, parent: &str) -> Result<()> {
        for s in [child, parent] {
            if !self.has_sort(s) {
                return Err(LangError::UndeclaredSort(s.to_string()));
            }
        }
        if child == parent || self.is_subsort(parent, child) {
            return Err(LangError::SortCycle(child.to_string()));
        }
        let edge = (child.to_string(), parent.to_string());
        if !self.edges.contains(&edge) {
            self.edges.push(edge);
        }
        Ok(())
    }

    pub fn add_instance(&mut self, name: &str, sort: &str) -> Result<()> {
        self.add_instance_term(Term::constant(name), sort)
    }

    pub fn add_instance_term(&mut self, term: Term, sort: &str) -> Result<()> {
        if !self.has_sort(sort) {
            return Err(LangError::UndeclaredSort(sort.to_string()));
        }
        let entry = (term, sort.to_string());
        if !self.instances.contains(&entry) {
            self.instances.push(entry);
        }
        Ok(())
    }

    /// Reflexive-transitive subsort test.
    pub fn is_subsort(&self, child: &str, parent: &str) -> bool {
        if child == parent {
            return true;
        }
        let mut stack = vec![child];
        let mut seen = BTreeSet::new();
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            for (c, p) in &self.edges {
                if c == s {
                    if p == parent {
                        return true;
                    }
                    stack.push(p);
                }
            }
        }
        false
    }

    /// Declared sort of an instance name (the first declaration).
    pub fn sort_of(&self, name: &str) -> Option<&str> {
        self.instances
            .iter()
            .find(|(t, _)| t.as_const() == Some(name))
            .map(|(_, s)| s.as_str())
    }

    pub fn is_instance_of(&self, name: &str, sort: &str) -> bool {
        self.instances
            .iter()
            .any(|(t, s)| t.as_const() == Some(name) && self.is_subsort(s, sort))
    }

    pub fn term_is_instance_of(&self, term: &Term, sort: &str) -> bool {
        self.instances
            .iter()
            .any(|(t, s)| t == term && self.is_subsort(s, sort))
    }

    /// Instance terms of `sort` (including subsorts) in declaration order,
    /// without duplicates.
    pub fn instance_terms(&self, sort: &str) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for (t, s) in &self.instances {
            if self.is_subsort(s, sort) && !out.contains(t) {
                out.push(t.clone());
            }
        }
        out
    }

    /// Instance names of `sort`; compound instances are skipped.
    pub fn instances_of(&self, sort: &str) -> Vec<String> {
        self.instance_terms(sort)
            .into_iter()
            .filter_map(|t| t.as_const().map(str::to_string))
            .collect()
    }

    /// Most specific of two sorts if one contains the other.
    pub fn meet(&self, a: &str, b: &str) -> Option<String> {
        if self.is_subsort(a, b) {
            Some(a.to_string())
        } else if self.is_subsort(b, a) {
            Some(b.to_string())
        } else {
            None
        }
    }

    /// Instance lists for every sort, computed once.
    pub fn instance_table(&self) -> HashMap<String, Vec<Term>> {
        self.sorts
            .iter()
            .map(|s| (s.clone(), self.instance_terms(s)))
            .collect()
    }

    /// Merges another hierarchy into this one (sorts, edges, instances).
    pub fn merge(&mut self, other: &SortHierarchy) -> Result<()> {
        for s in &other.sorts {
            self.add_sort(s);
        }
        for (c, p) in &other.edges {
            if !self.edges.contains(&(c.clone(), p.clone())) {
                self.add_subsort(c, p)?;
            }
        }
        for (t, s) in &other.instances {
            self.add_instance_term(t.clone(), s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_is_transitive() {
        let mut h = SortHierarchy::new();
        for s in ["entity", "location", "room"] {
            h.add_sort(s);
        }
        h.add_subsort("room", "location").unwrap();
        h.add_subsort("location", "entity").unwrap();
        h.add_instance("kitchen", "room").unwrap();
        assert!(h.is_instance_of("kitchen", "entity"));
        assert!(h.is_instance_of("kitchen", "room"));
        assert!(!h.is_subsort("entity", "room"));
        assert_eq!(h.instances_of("location"), vec!["kitchen"]);
    }

    #[test]
    fn cycle_rejected() {
        let mut h = SortHierarchy::new();
        h.add_sort("a");
        h.add_sort("b");
        h.add_subsort("a", "b").unwrap();
        assert_eq!(h.add_subsort("b", "a"), Err(LangError::SortCycle("b".into())));
        assert!(matches!(h.add_subsort("a", "a"), Err(LangError::SortCycle(_))));
    }

    #[test]
    fn instance_of_unknown_sort() {
        let mut h = SortHierarchy::new();
        assert_eq!(
            h.add_instance("x", "nope"),
            Err(LangError::UndeclaredSort("nope".into()))
        );
    }
}

use pb_core::{Coeff, Lit, Objective};

/// `<w, R, K>`: under the reasons `R` (true on the trail) the negated
/// objective literals `K` cannot all hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedLocalCore {
    pub weight: Coeff,
    pub reasons: Vec<Lit>,
    pub core: Vec<Lit>,
}

impl WeightedLocalCore {
    /// `<w_O(l), {l}, {~l}>` for a cost-incurring literal `l`.
    pub fn is_trivial(&self) -> bool {
        self.core.len() == 1 && self.reasons == [!self.core[0]]
    }

    /// `clause_q`: the disjunction of the negations of `R` and `K`.
    pub fn clause(&self) -> Vec<Lit> {
        let mut c: Vec<Lit> = self.reasons.iter().chain(&self.core).map(|&l| !l).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// An O-compatible set of cores with residual weights per objective term.
#[derive(Clone, Debug)]
pub struct CoreSet {
    cores: Vec<WeightedLocalCore>,
    residual: Vec<Coeff>,
    total: Coeff,
}

fn position(o: &Objective, l: Lit) -> Option<usize> {
    let i = o.terms().binary_search_by_key(&l.var(), |&(_, t)| t.var()).ok()?;
    (o.terms()[i].1 == l).then_some(i)
}

impl CoreSet {
    pub fn new(o: &Objective) -> CoreSet {
        CoreSet { cores: Vec::new(), residual: o.terms().iter().map(|&(c, _)| c).collect(), total: 0 }
    }

    pub fn cores(&self) -> &[WeightedLocalCore] {
        &self.cores
    }

    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }

    /// `w_O(C)`.
    pub fn weight(&self) -> Coeff {
        self.total
    }

    /// Residual weight of the objective term at position `i`.
    pub fn residual_at(&self, i: usize) -> Coeff {
        self.residual[i]
    }

    /// `r(l, C)`; zero for literals outside the objective.
    pub fn residual(&self, o: &Objective, l: Lit) -> Coeff {
        position(o, l).map_or(0, |i| self.residual[i])
    }

    /// Add a core. Every member of `core` must be the negation of an
    /// objective literal whose residual is at least `weight`.
    pub fn insert(&mut self, o: &Objective, q: WeightedLocalCore) {
        assert!(q.weight > 0, "core weight must be positive");
        for &k in &q.core {
            let i = position(o, !k).expect("core literal is not a negated objective literal");
            assert!(self.residual[i] >= q.weight, "core breaks O-compatibility");
            self.residual[i] -= q.weight;
        }
        self.total += q.weight;
        self.cores.push(q);
    }

    /// `clause_C`: negations of all reasons of all cores.
    pub fn clause(&self) -> Vec<Lit> {
        let mut c: Vec<Lit> = self.cores.iter().flat_map(|q| q.reasons.iter().map(|&l| !l)).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Objective literals with positive residual and their residuals.
    pub fn positive_residuals(&self, o: &Objective) -> Vec<(Lit, Coeff)> {
        o.terms()
            .iter()
            .zip(&self.residual)
            .filter(|(_, &r)| r > 0)
            .map(|(&(_, l), &r)| (l, r))
            .collect()
    }
}

/// `min` of the residuals of the objective literals negated in `k`.
pub fn core_weight(o: &Objective, k: &[Lit], c: &CoreSet) -> Coeff {
    assert!(!k.is_empty(), "empty core");
    k.iter().map(|&l| c.residual(o, !l)).min().unwrap()
}

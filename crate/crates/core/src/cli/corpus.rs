use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::syntax::{Formula, Language, ProblemSpec, Relation};

/// Parameters of a random corpus. Generation is a pure function of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub seed: u64,
    pub count: usize,
    pub max_formula_size: usize,
    pub max_modal_depth: usize,
    pub n_props: usize,
    pub n_rels: usize,
    pub language: Language,
    pub relneg_probability: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            seed: 7,
            count: 200,
            max_formula_size: 14,
            max_modal_depth: 3,
            n_props: 3,
            n_rels: 2,
            language: Language::Km,
            relneg_probability: 0.0,
        }
    }
}

pub fn prop_name(i: usize) -> String {
    const NAMES: [&str; 5] = ["p", "q", "s", "u", "v"];
    NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("p{i}"))
}

pub fn rel_name(i: usize) -> String {
    const NAMES: [&str; 3] = ["r", "t", "w"];
    NAMES.get(i).map(|s| s.to_string()).unwrap_or_else(|| format!("r{i}"))
}

struct Gen<'a> {
    params: &'a CorpusParams,
    rng: ChaCha8Rng,
}

impl Gen<'_> {
    fn prop(&mut self) -> Formula {
        Formula::prop(prop_name(self.rng.gen_range(0..self.params.n_props.max(1))))
    }

    fn relation(&mut self) -> Relation {
        let mut rel = Relation::constant(rel_name(self.rng.gen_range(0..self.params.n_rels.max(1))));
        if self.params.language == Language::KmNot {
            for _ in 0..2 {
                if self.rng.gen_bool(self.params.relneg_probability) {
                    rel = Relation::negate(rel);
                } else {
                    break;
                }
            }
        }
        rel
    }

    /// A formula with exactly `size` nodes and modal depth at most `depth`.
    fn formula(&mut self, size: usize, depth: usize) -> Formula {
        let can_box = depth > 0 && self.params.n_rels > 0;
        if size <= 1 {
            return self.prop();
        }
        if size == 2 {
            let inner = self.prop();
            return if can_box && self.rng.gen_bool(0.5) {
                Formula::necessity(self.relation(), inner)
            } else {
                Formula::negate(inner)
            };
        }
        let roll: f64 = self.rng.gen();
        if roll < 0.4 {
            let left = self.rng.gen_range(1..=size - 2);
            let l = self.formula(left, depth);
            let r = self.formula(size - 1 - left, depth);
            Formula::or(l, r)
        } else if roll < 0.7 || !can_box {
            Formula::negate(self.formula(size - 1, depth))
        } else {
            let rel = self.relation();
            Formula::necessity(rel, self.formula(size - 1, depth - 1))
        }
    }
}

/// Random problems, each a single positive root assertion at `a0`.
pub fn generate_corpus(params: &CorpusParams) -> Vec<ProblemSpec> {
    let mut gen = Gen { params, rng: ChaCha8Rng::seed_from_u64(params.seed) };
    (0..params.count)
        .map(|_| {
            let max = params.max_formula_size.max(1);
            let size = gen.rng.gen_range(max.div_ceil(2)..=max);
            let f = gen.formula(size, params.max_modal_depth);
            ProblemSpec::from_formula(f, params.language)
        })
        .collect()
}

/// Random conjunctions of clauses in which every clause has at most one
/// disjunct that is not a negated proposition.
pub fn horn_corpus(seed: u64, count: usize) -> Vec<ProblemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prop = |rng: &mut ChaCha8Rng| Formula::prop(prop_name(rng.gen_range(0..4)));
    (0..count)
        .map(|_| {
            let clauses: Vec<Formula> = (0..rng.gen_range(3..=7))
                .map(|_| {
                    let mut lits: Vec<Formula> = (0..rng.gen_range(0..=2)).map(|_| Formula::negate(prop(&mut rng))).collect();
                    if lits.is_empty() || rng.gen_bool(0.7) {
                        let rel = Relation::constant(rel_name(rng.gen_range(0..2)));
                        let positive = match rng.gen_range(0..5) {
                            0 | 1 => prop(&mut rng),
                            2 => Formula::necessity(rel, prop(&mut rng)),
                            3 => Formula::possibility(rel, prop(&mut rng)),
                            _ => {
                                let inner = Formula::or(Formula::negate(prop(&mut rng)), prop(&mut rng));
                                Formula::necessity(rel, inner)
                            }
                        };
                        lits.push(positive);
                    }
                    lits.into_iter().reduce(Formula::or).unwrap()
                })
                .collect();
            let f = clauses.into_iter().reduce(Formula::and).unwrap();
            ProblemSpec::from_formula(f, Language::KmNot)
        })
        .collect()
}

/// Problem file text for a single-formula problem.
pub fn problem_text(problem: &ProblemSpec) -> String {
    let mut out = format!("language {}\n", problem.language);
    for atom in &problem.assertions {
        out.push_str(&atom.to_string());
        out.push('\n');
    }
    out
}

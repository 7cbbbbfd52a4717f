use crate::corpus::{parse_triples, TripleRecord};
use crate::taxonomy::Taxonomy;

pub const TOY_TAXONOMY: &str = "n_entity\tnoun\t\t
n_food\tnoun\tn_entity\t
n_person\tnoun\tn_entity\t
n_apple\tnoun\tn_food\tapple#1
n_chicken_food\tnoun\tn_food\tchicken#1
n_wimp\tnoun\tn_person\tchicken#3,wimp#1
v_consume\tverb\t\tconsume#1
v_eat\tverb\tv_consume\teat#1
v_devour\tverb\tv_consume\tdevour#1
";

pub const TOY_CORPUS: &str = "eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tapple\tn_apple
eat\tv_eat\tobj\tchicken\tn_chicken_food
devour\tv_devour\tobj\tchicken\tn_chicken_food
";

pub fn toy_taxonomy() -> Taxonomy {
    TOY_TAXONOMY.parse().unwrap()
}

pub fn toy_corpus(t: &Taxonomy) -> Vec<TripleRecord> {
    parse_triples(TOY_CORPUS, t).unwrap()
}

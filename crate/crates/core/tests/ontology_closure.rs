use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schemagraph_core::ontology::{IsaLink, Ontology};
use schemagraph_testkit::closure::{ancestors_or_self, has_cycle, random_dag};
use schemagraph_testkit::fixtures::cyclic_triple;
use serde_json::{json, Value};

fn node(title: &str, parents: &[String]) -> Value {
    json!({
        "$schema": "http://localhost:8000/schemas/validators/node_validator.json#",
        "id": format!("http://localhost:8000/schemas/dag/{title}.json#"),
        "title": title,
        "type": "object",
        "properties": {"id": {"type": "string"}, "name": {"type": "string"}},
        "required": ["id", "name"],
        "parents": parents,
        "graph_element": "node"
    })
}

fn title(i: usize) -> String {
    format!("n{i:02}")
}

#[test]
fn closure_matches_brute_force_on_random_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x15a);
    for round in 0..100 {
        let size = 1 + round % 20;
        let parents = random_dag(&mut rng, size, 0.3);
        let mut o = Ontology::default();
        for (i, ps) in parents.iter().enumerate() {
            let ps: Vec<String> = ps.iter().map(|&p| title(p)).collect();
            o.register_descriptor(&node(&title(i), &ps)).unwrap();
        }
        for i in 0..size {
            let got: std::collections::BTreeSet<String> =
                o.isa_closure(&title(i)).unwrap().into_iter().collect();
            let expected = ancestors_or_self(&parents, i)
                .into_iter()
                .map(title)
                .collect();
            assert_eq!(got, expected, "round {round}, node {i}");
            assert_eq!(o.isa_closure(&title(i)).unwrap()[0], title(i));
        }
        let links = o.reachability_graph().isa_links;
        let edge_count: usize = parents.iter().map(Vec::len).sum();
        assert_eq!(links.len(), edge_count);
    }
}

#[test]
fn closure_order_is_breadth_first_with_lexicographic_ties() {
    let mut o = Ontology::default();
    o.register_descriptor(&node("root", &[])).unwrap();
    o.register_descriptor(&node("b", &["root".into()])).unwrap();
    o.register_descriptor(&node("a", &["root".into()])).unwrap();
    o.register_descriptor(&node("leaf", &["b".into(), "a".into()]))
        .unwrap();
    assert_eq!(o.isa_closure("leaf").unwrap(), ["leaf", "a", "b", "root"]);

    let mut o = Ontology::default();
    o.register_descriptor(&node("C", &[])).unwrap();
    o.register_descriptor(&node("B", &["C".into()])).unwrap();
    o.register_descriptor(&node("A", &["B".into()])).unwrap();
    assert_eq!(o.isa_closure("A").unwrap(), ["A", "B", "C"]);
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

#[test]
fn every_order_of_the_cyclic_triple_is_rejected() {
    let triple = cyclic_triple();
    let orders = permutations(&[0, 1, 2]);
    assert_eq!(orders.len(), 6);
    for order in orders {
        let mut o = Ontology::default();
        let mut first_rejection = None;
        for (step, &i) in order.iter().enumerate() {
            match o.register_descriptor(&triple[i]) {
                Ok(_) => {}
                Err(e) => {
                    assert!(
                        matches!(e.code(), "dangling_reference" | "isa_cycle"),
                        "{e}"
                    );
                    first_rejection.get_or_insert(step);
                }
            }
        }
        // the third registration would close the cycle, so something must
        // have been refused by then
        assert!(first_rejection.is_some_and(|s| s <= 2), "{order:?}");
        assert!(o.len() < 3);

        let titles: Vec<String> = o.titles().map(str::to_string).collect();
        let index = |t: &str| titles.iter().position(|x| x == t).unwrap();
        let mut parents = vec![Vec::new(); titles.len()];
        for IsaLink { child, parent } in o.reachability_graph().isa_links {
            parents[index(&child)].push(index(&parent));
        }
        assert!(!has_cycle(&parents), "{order:?}");
    }
}

#[test]
fn registration_is_monotonic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let parents = random_dag(&mut rng, 15, 0.25);
    let mut o = Ontology::default();
    let mut previous = o.reachability_graph();
    for (i, ps) in parents.iter().enumerate() {
        let ps: Vec<String> = ps.iter().map(|&p| title(p)).collect();
        o.register_descriptor(&node(&title(i), &ps)).unwrap();
        // a rejected registration leaves the schema untouched
        assert!(o.register_descriptor(&node(&title(i), &[])).is_err());
        let now = o.reachability_graph();
        assert!(now.concepts.is_superset(&previous.concepts));
        assert!(now.isa_links.is_superset(&previous.isa_links));
        assert_eq!(now.concepts.len(), previous.concepts.len() + 1);
        previous = now;
    }
}

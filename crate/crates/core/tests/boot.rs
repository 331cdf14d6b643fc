mod common;

use std::time::{Duration, Instant};

use common::network::{check_exchange, full_boot};
use common::{random_topology, rng};
use nopsys::fabric::{Engine, LinkSpec, Topology};

#[test]
fn single_processor() {
    let e = full_boot(&Topology::single());
    let out = nopsys::fabric::words_text(&engine_output(e));
    assert!(out.contains("init"), "{out:?}");
}

fn engine_output(mut e: Engine) -> Vec<nopsys::fabric::Word> {
    e.console().take_output()
}

#[test]
fn torus_2x2() {
    full_boot(&Topology::torus(2, 2));
}

#[test]
fn torus_3x3() {
    full_boot(&Topology::torus(3, 3));
}

#[test]
fn line_with_unreachable_processor() {
    let links = vec![
        LinkSpec { a: 0, a_link: 1, b: 1, b_link: 3 },
        LinkSpec { a: 1, a_link: 0, b: 2, b_link: 2 },
    ];
    let t = Topology::new(4, links).unwrap();
    full_boot(&t);
}

#[test]
fn random_topologies() {
    let started = Instant::now();
    let mut r = rng(0x5eed);
    for round in 0..50 {
        let n = 2 + round % 15;
        let t = random_topology(&mut r, n);
        assert_eq!(t.reachable_from_first().len(), n);
        let mut e = full_boot(&t);
        check_exchange(&t, &mut e);
    }
    assert!(started.elapsed() < Duration::from_secs(60));
}

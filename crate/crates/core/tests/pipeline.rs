//! End-to-end checks across modules: files on disk, trace-driven translation
//! against real rollouts, and PID policies backed by networks vs trees.

use otr_core::emitter::{emit_program, parse_program, EmitOptions, ProgramValue};
use otr_core::envs::{collect_trace, rollout, EnvId, Policy};
use otr_core::netio::{load_network, save_network, Activation, LayerSpec, LeafActivation, NetworkSpec, TaskKind};
use otr_core::pidpolicy::{load_pid_policy, save_pid_policy, PidPolicySpec, ThetaSource};
use otr_core::rng::{InputBox, SeededRng};
use otr_core::synth::{random_network, RandomNetConfig};
use otr_core::translator::{translate, verify_equivalence, TranslateOptions};
use otr_core::tree::{load_trace, load_tree, prune_topk, save_trace, save_tree, stats, DEFAULT_SPARSE_EPS};
use otr_core::{fixtures, Prediction};

fn small_controller(rng: &mut SeededRng, input_dim: usize, hidden: Vec<usize>) -> NetworkSpec {
    let mut cfg = RandomNetConfig::regression(input_dim, hidden);
    cfg.tanh_leaf = true;
    random_network(rng, &cfg)
}

#[test]
fn files_round_trip_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixtures::relu3_network();
    save_network(&net, dir.path().join("net.json")).unwrap();
    let net2 = load_network(dir.path().join("net.json")).unwrap();
    assert_eq!(net, net2);
    assert_eq!(net.hash(), net2.hash());

    let tree = translate(&net2, &TranslateOptions::full()).unwrap();
    save_tree(&tree, dir.path().join("tree.json")).unwrap();
    let tree2 = load_tree(dir.path().join("tree.json")).unwrap();
    assert_eq!(tree, tree2);
    assert!(verify_equivalence(&net, &tree2, &InputBox::cube(2, -3.0, 3.0), 2000, 1).unwrap().pass);

    let prog = emit_program(&tree2, &EmitOptions::default()).unwrap();
    let parsed = parse_program(&prog.source, &prog.names).unwrap();
    assert_eq!(parsed.decision_count(), 7);
    for x in InputBox::cube(2, -3.0, 3.0).samples(200, 2) {
        let ProgramValue::Values(v) = parsed.evaluate(&x).unwrap() else { panic!() };
        assert!((v[0] - net.forward(&x).unwrap()[0]).abs() < 1e-8);
    }
}

#[test]
fn trace_driven_tree_replays_network_rollouts() {
    let mut rng = SeededRng::new(17);
    for (env, hidden) in [(EnvId::MountainCar, vec![4, 3]), (EnvId::Pendulum, vec![6, 4])] {
        let net = small_controller(&mut rng, env.obs_dim(), hidden);
        let net_run = rollout(Policy::Network(&net), env, 12, 5).unwrap();
        let trace = net_run.trace.clone().unwrap();
        let tree = translate(&net, &TranslateOptions::trace_driven(&trace)).unwrap();
        assert_eq!(stats(&tree, DEFAULT_SPARSE_EPS).patterns, trace.distinct());
        let tree_run = rollout(Policy::Tree(&tree), env, 12, 5).unwrap();
        assert_eq!(tree_run.fallback_count, 0, "{env}");
        assert_eq!(tree_run.episode_steps, net_run.episode_steps);
        for (a, b) in tree_run.rewards.iter().zip(&net_run.rewards) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{env}: {a} vs {b}");
        }
    }
}

#[test]
fn top1_policy_falls_back_but_keeps_running() {
    let mut rng = SeededRng::new(23);
    let net = small_controller(&mut rng, 3, vec![5]);
    let trace = collect_trace(&net, EnvId::Pendulum, 10, 1).unwrap();
    assert!(trace.distinct() > 1);
    let full = translate(&net, &TranslateOptions::full()).unwrap();
    let top1 = prune_topk(&full, &trace, 1).unwrap();
    let run = rollout(Policy::Tree(&top1), EnvId::Pendulum, 10, 1).unwrap();
    assert!(run.fallback_count > 0);
    assert_eq!(run.steps, 2000);
}

#[test]
fn trace_files_feed_translation() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = SeededRng::new(29);
    let net = small_controller(&mut rng, 2, vec![3, 3]);
    let trace = collect_trace(&net, EnvId::MountainCar, 4, 0).unwrap();
    save_trace(&trace, dir.path().join("t.json")).unwrap();
    let back = load_trace(dir.path().join("t.json")).unwrap();
    assert_eq!(back, trace);
    let a = translate(&net, &TranslateOptions::trace_driven(&back)).unwrap();
    assert_eq!(a.meta.trace_id.as_deref(), Some(trace.id().as_str()));
}

#[test]
fn pid_theta_from_network_or_its_tree_acts_identically() {
    let mut rng = SeededRng::new(31);
    let mut cfg = RandomNetConfig::regression(3, vec![2]);
    cfg.outputs = 9;
    cfg.scale = 0.5;
    let theta_net = random_network(&mut rng, &cfg);
    let theta_tree = translate(&theta_net, &TranslateOptions::full()).unwrap();
    let eps = vec![1.0, 0.0, 0.0];
    let by_net = PidPolicySpec::new(eps.clone(), 5, 1, ThetaSource::Network(theta_net)).unwrap();
    let by_tree = PidPolicySpec::new(eps, 5, 1, ThetaSource::Tree(theta_tree)).unwrap();
    let (mut s1, mut s2) = (by_net.new_state(), by_tree.new_state());
    for _ in 0..50 {
        let th = rng.uniform(-3.0, 3.0);
        let s = [th.cos(), th.sin(), rng.uniform(-8.0, 8.0)];
        let a = by_net.act(&s, &mut s1).unwrap()[0];
        let b = by_tree.act(&s, &mut s2).unwrap()[0];
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    let dir = tempfile::tempdir().unwrap();
    save_pid_policy(&by_net, dir.path().join("p.json")).unwrap();
    assert_eq!(load_pid_policy(dir.path().join("p.json")).unwrap(), by_net);
}

#[test]
fn pid_policy_at_equilibrium_is_silent_for_any_theta() {
    let mut rng = SeededRng::new(37);
    let mut cfg = RandomNetConfig::regression(3, vec![3, 2]);
    cfg.outputs = 9;
    let pol = PidPolicySpec::new(vec![0.3, -0.2, 0.9], 4, 1, ThetaSource::Network(random_network(&mut rng, &cfg))).unwrap();
    let mut st = pol.new_state();
    for _ in 0..6 {
        assert_eq!(pol.act(pol.epsilon(), &mut st).unwrap(), vec![0.0]);
    }
}

#[test]
fn classification_network_rejected_as_controller() {
    let net = NetworkSpec::new(
        2,
        TaskKind::ClassificationBinary,
        false,
        LeafActivation::Identity,
        vec![
            LayerSpec::new(vec![vec![1.0, 0.0]], vec![0.0], Activation::Relu),
            LayerSpec::new(vec![vec![1.0]], vec![0.0], Activation::Logistic),
        ],
    )
    .unwrap();
    assert!(rollout(Policy::Network(&net), EnvId::MountainCar, 1, 0).is_err());
    let tree = translate(&net, &TranslateOptions::full()).unwrap();
    assert_eq!(tree.predict(&[1.0, 0.0]).unwrap(), Prediction::Label(1));
}

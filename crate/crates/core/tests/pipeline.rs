mod common;

use std::sync::Arc;

use common::*;
use stance_debate::agents::Agents;
use stance_debate::debate::{detect, AblationFlags, DebateConfig, Evidence, UpdateOrder};
use stance_debate::gateway::{Gateway, ResponseCache, Rule};
use stance_debate::model::{AgentRole, Subjectivity, Verdict};
use stance_debate::opinion::TemplateId;
use stance_debate::stance::StanceConfig;

use Verdict::{Fake, Real};

fn cfg(rounds: usize) -> DebateConfig {
    DebateConfig {
        max_rounds: rounds,
        ..DebateConfig::default()
    }
}

#[tokio::test]
async fn judge_only_on_final_disagreement() {
    for (vp, vn) in [(Fake, Fake), (Fake, Real), (Real, Fake), (Real, Real)] {
        let backend = Arc::new(Counting::new(round_rules(&[Real, Fake, vp], &[Fake, Real, vn], Fake)));
        let t = detect(&agents_with(backend.clone()), &thread("c", 9), &cfg(2), &StanceConfig::default(), 0)
            .await
            .unwrap();
        let disagree = vp != vn;
        assert_eq!(t.judge_used(), disagree, "{vp:?} {vn:?}");
        assert_eq!(backend.count(AgentRole::Judge), usize::from(disagree));
        assert_eq!(t.consensus, !disagree);
        assert_eq!(t.final_verdict, if disagree { Fake } else { vp });
        assert_eq!(t.rounds_run, 2);
        assert_eq!(t.opinions.len(), 6);
    }
}

#[tokio::test]
async fn judge_sees_final_round_replies() {
    let backend = Arc::new(Counting::new(
        [
            vec![Rule::contains("<P1>", "Judge: Real").and(stance_debate::gateway::Matcher::contains("<N1>")).for_role(AgentRole::Judge)],
            round_rules(&[Real, Real], &[Fake, Fake], Fake),
        ]
        .concat(),
    ));
    let t = detect(&agents_with(backend), &thread("c", 3), &cfg(1), &StanceConfig::default(), 0)
        .await
        .unwrap();
    let j = t.judge_opinion.unwrap();
    assert_eq!(j.verdict, Real);
    assert_eq!(j.round, 1);
}

#[tokio::test]
async fn opinion_count_matches_rounds() {
    for m in 0..=3 {
        let p = vec![Real; m + 1];
        let n = vec![Fake; m + 1];
        let t = detect(&agents(round_rules(&p, &n, Real)), &thread("c", 6), &cfg(m), &StanceConfig::default(), 0)
            .await
            .unwrap();
        assert_eq!(t.opinions.len(), 2 * (m + 1), "M={m}");
        assert_eq!(t.rounds_run, m);
        for j in 0..=m {
            let at: Vec<_> = t.opinions.iter().filter(|o| o.round == j).collect();
            assert_eq!(at.len(), 2);
            assert_eq!(at[0].agent, AgentRole::DebaterP);
            assert_eq!(at[1].agent, AgentRole::DebaterN);
        }
    }
}

#[tokio::test]
async fn forced_agreement_and_disagreement() {
    let agree = detect(
        &agents(round_rules(&[Real, Real, Real], &[Real, Real, Real], Fake)),
        &thread("c", 4),
        &cfg(2),
        &StanceConfig::default(),
        0,
    )
    .await
    .unwrap();
    assert_eq!(agree.final_verdict, Real);
    assert!(agree.judge_opinion.is_none());

    let split = detect(
        &agents(round_rules(&[Real, Real, Real], &[Fake, Fake, Fake], Fake)),
        &thread("c", 4),
        &cfg(2),
        &StanceConfig::default(),
        0,
    )
    .await
    .unwrap();
    assert_eq!(split.final_verdict, Fake);
    assert_eq!(split.predicted_label(), stance_debate::model::Label::Rumor);
}

#[tokio::test]
async fn stance_sets_seed_the_right_debater() {
    let rules = [
        vec![
            Rule::contains("Comment: 1. agree", "I see support, so Real").for_role(AgentRole::DebaterP),
            Rule::contains("Comment: 1. disagree", "I see rebuttals, so Fake").for_role(AgentRole::DebaterN),
        ],
        round_rules(&[Fake, Fake], &[Real, Real], Real),
    ]
    .concat();
    let t = detect(&agents(rules), &thread("c", 9), &cfg(1), &StanceConfig { k: 2, ..Default::default() }, 0)
        .await
        .unwrap();
    assert_eq!(t.opinions[0].verdict, Real);
    assert_eq!(t.opinions[1].verdict, Fake);
    let Evidence::StanceSeparated { sets } = &t.evidence else {
        panic!("expected stance separation");
    };
    assert_eq!(sets.support.len(), 2);
    assert_eq!(sets.oppose.len(), 2);
    assert!(sets.support.iter().all(|s| s.comment.text.starts_with("agree")));
}

#[tokio::test]
async fn unparseable_debater_aborts_with_partial_opinions() {
    let rules = [
        vec![Rule::contains("<P0>", "I really cannot tell.").for_role(AgentRole::DebaterP)],
        round_rules(&[Real, Real], &[Fake, Fake], Fake),
    ]
    .concat();
    let abort = detect(&agents(rules), &thread("c", 3), &cfg(1), &StanceConfig::default(), 0)
        .await
        .unwrap_err();
    assert_eq!(abort.stage, stance_debate::debate::Stage::Debate);
    assert_eq!(abort.opinions.len(), 2);
    assert!(abort.error.contains("DebaterP"), "{}", abort.error);
}

#[tokio::test]
async fn warm_cache_replays_byte_identical_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let rules = round_rules(&[Real, Fake, Fake], &[Fake, Real, Real], Fake);
    let live = Agents::new(
        Arc::new(Gateway::new(Arc::new(Counting::new(rules))).with_cache(ResponseCache::open(&path).unwrap())),
        Default::default(),
    );
    let t1 = detect(&live, &thread("c", 12), &cfg(2), &StanceConfig::default(), 3).await.unwrap();
    drop(live);

    let offline = Agents::new(
        Arc::new(Gateway::new(Arc::new(Unreachable)).with_cache(ResponseCache::open(&path).unwrap())),
        Default::default(),
    );
    let t2 = detect(&offline, &thread("c", 12), &cfg(2), &StanceConfig::default(), 3).await.unwrap();
    assert_eq!(serde_json::to_vec(&t1).unwrap(), serde_json::to_vec(&t2).unwrap());
}

#[tokio::test]
async fn update_order_never_changes_transcript() {
    let rules = [
        vec![
            Rule::contains("<N0>", "<P1> the other side says Fake but I say Real").for_role(AgentRole::DebaterP),
            Rule::contains("<P1>", "<N1> P already moved, so Real").for_role(AgentRole::DebaterN),
        ],
        round_rules(&[Fake, Fake], &[Fake, Fake], Fake),
    ]
    .concat();
    let mut seen = Vec::new();
    for order in [UpdateOrder::Concurrent, UpdateOrder::PFirst, UpdateOrder::NFirst] {
        let c = DebateConfig {
            update_order: order,
            ..cfg(1)
        };
        let t = detect(&agents(rules.clone()), &thread("c", 5), &c, &StanceConfig::default(), 0).await.unwrap();
        // N must never see P's round-1 reply.
        assert!(!t.opinions[3].raw_text.contains("moved"));
        seen.push(serde_json::to_string(&t).unwrap());
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[tokio::test]
async fn skip_debate_with_skip_stance_makes_one_debater_call() {
    let backend = Arc::new(Counting::new(round_rules(&[Fake], &[Real], Real)));
    let c = DebateConfig {
        ablation: AblationFlags {
            skip_debate: true,
            skip_stance_separation: true,
            ..Default::default()
        },
        ..cfg(2)
    };
    let t = detect(&agents_with(backend.clone()), &thread("c", 30), &c, &StanceConfig { k: 4, ..Default::default() }, 1)
        .await
        .unwrap();
    assert_eq!(backend.count(AgentRole::DebaterP), 1);
    assert_eq!(backend.count(AgentRole::DebaterN), 0);
    assert_eq!(backend.count(AgentRole::Judge), 0);
    assert_eq!(backend.count(AgentRole::Scorer), 0);
    assert_eq!(t.opinions.len(), 1);
    assert_eq!((t.rounds_run, t.consensus, t.final_verdict), (0, true, Fake));
    let Evidence::RandomSplit { first, second, .. } = &t.evidence else {
        panic!("expected random split");
    };
    assert_eq!(first.len() + second.len(), 8);
}

#[tokio::test]
async fn random_split_is_reproducible_per_seed() {
    let c = DebateConfig {
        ablation: AblationFlags {
            skip_stance_separation: true,
            ..Default::default()
        },
        ..cfg(0)
    };
    let rules = round_rules(&[Real], &[Real], Real);
    let run = |seed| {
        let (a, c, r) = (agents(rules.clone()), c.clone(), thread("c", 40));
        async move { detect(&a, &r, &c, &StanceConfig { k: 5, ..Default::default() }, seed).await.unwrap().evidence }
    };
    assert_eq!(run(11).await, run(11).await);
    assert_ne!(run(11).await, run(12).await);
}

#[tokio::test]
async fn forced_routes_override_classifier() {
    for (flags, want) in [
        (AblationFlags { force_subjective_prompt: true, ..Default::default() }, TemplateId::InitSubjective),
        (AblationFlags { force_nonsubjective_prompt: true, ..Default::default() }, TemplateId::InitNonSubjective),
        (AblationFlags::default(), TemplateId::InitNonSubjective),
    ] {
        let c = DebateConfig { ablation: flags, ..cfg(1) };
        let t = detect(&agents(round_rules(&[Real, Real], &[Real, Real], Real)), &thread("c", 4), &c, &StanceConfig::default(), 0)
            .await
            .unwrap();
        assert_eq!(t.initial_template, want);
        assert_eq!(t.subjectivity, Subjectivity::NonSubjective);
    }
}

//! Insertion into an existing tour without reordering its visits.

use std::time::Instant;

use crate::model::{ArrivalProfile, Context, Order, Route, Schedule, TimeWindow};
use crate::slots::{Method, SlotQuery, SlotResult, Verdict, Witness, WindowOutcome};

/// Smallest position in the insertion range where `candidate` fits into
/// `window`, or `None`. Linear in the tour length.
pub fn simple_insert(
    route: &Route<'_>,
    profile: &ArrivalProfile,
    candidate: &Order,
    window: &TimeWindow,
    ctx: &Context,
) -> Option<usize> {
    if profile.load + candidate.weight as u64 > route.capacity as u64 {
        return None;
    }
    route
        .insertion_range(profile, candidate, window)
        .positions()
        .find(|&i| route.check_insertion(profile, i, candidate, window, ctx))
}

/// [`simple_insert`] against tour `tour` of a schedule, using its cached profile.
pub fn simple_insert_into(
    schedule: &Schedule,
    tour: usize,
    candidate: &Order,
    window: &TimeWindow,
) -> Option<usize> {
    simple_insert(
        &schedule.route(tour),
        schedule.profile(tour),
        candidate,
        window,
        schedule.context(),
    )
}

/// First tour (declaration order) and position accepting the candidate.
pub fn first_fit(schedule: &Schedule, candidate: &Order, window: &TimeWindow) -> Option<(usize, usize)> {
    (0..schedule.len())
        .find_map(|t| simple_insert_into(schedule, t, candidate, window).map(|pos| (t, pos)))
}

pub fn solve_sop_simple(query: &SlotQuery<'_>) -> SlotResult {
    let started = Instant::now();
    let ctx = query.schedule.context();
    let outcomes = query
        .windows
        .iter()
        .map(|&w| {
            let t0 = Instant::now();
            let window = ctx.window(w).expect("query windows validated");
            let verdict = match first_fit(query.schedule, &query.candidate, window) {
                Some((tour, position)) => Verdict::Available(Witness::Position { tour, position }),
                None => Verdict::Unavailable,
            };
            WindowOutcome {
                window: w,
                verdict,
                elapsed: t0.elapsed(),
            }
        })
        .collect();
    SlotResult {
        method: Method::Simple,
        outcomes,
        elapsed: started.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::metrics::WindowEval;
    use crate::model::{check_insertion_feasible, compute_arrival_profile, WindowId};
    use crate::slots::commit;
    use crate::testkit;

    #[test]
    fn empty_tour_takes_position_zero() {
        let fx = testkit::hourly_three_customer_fixture();
        let empty = fx.tour.with_sequence(Vec::new());
        let route = empty.resolve(&fx.ctx).unwrap();
        let p = route.profile(&fx.ctx);
        let w = fx.ctx.window(WindowId(1)).unwrap();
        assert_eq!(simple_insert(&route, &p, &fx.candidate, w, &fx.ctx), Some(0));
    }

    #[test]
    fn three_customer_fixture_inserts_after_middle_customer() {
        let fx = testkit::hourly_three_customer_fixture();
        let route = fx.tour.resolve(&fx.ctx).unwrap();
        let p = route.profile(&fx.ctx);
        let w = fx.ctx.window(WindowId(1)).unwrap();
        let pos = simple_insert(&route, &p, &fx.candidate, w, &fx.ctx).unwrap();
        assert!(testkit::simulate_feasible(&route.with_inserted(pos, &fx.candidate), &fx.ctx));
    }

    #[test]
    fn heavy_candidate_is_rejected() {
        let fx = testkit::hourly_three_customer_fixture();
        let route = fx.tour.resolve(&fx.ctx).unwrap();
        let p = route.profile(&fx.ctx);
        let heavy = Order {
            weight: fx.tour.capacity,
            ..fx.candidate
        };
        let w = fx.ctx.window(WindowId(1)).unwrap();
        assert_eq!(simple_insert(&route, &p, &heavy, w, &fx.ctx), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_smallest_feasible_position(seed in any::<u64>()) {
            let case = testkit::random_feasible_case(seed, 10);
            let route = case.tour.resolve(&case.ctx).unwrap();
            let p = compute_arrival_profile(&case.tour, &case.ctx).unwrap();
            for w in case.ctx.windows().iter() {
                let got = simple_insert(&route, &p, &case.candidate, w, &case.ctx);
                let want = testkit::feasible_positions(&case.tour, &case.candidate, w.id, &case.ctx)
                    .into_iter()
                    .min();
                prop_assert_eq!(got, want);
                if WindowEval::new(&route, &p, &case.candidate, w, &case.ctx).infeasible() {
                    prop_assert_eq!(got, None);
                }
                if let Some(i) = got {
                    prop_assert!(check_insertion_feasible(&case.tour, &p, i, &case.candidate, w, &case.ctx));
                }
            }
        }

        #[test]
        fn solve_leaves_schedule_untouched_and_witnesses_replay(seed in any::<u64>()) {
            let case = testkit::random_schedule_case(seed, 3, 15);
            let before = case.schedule.fingerprint();
            let query = SlotQuery::new(&case.schedule, case.candidate).unwrap();
            let result = solve_sop_simple(&query);
            prop_assert_eq!(before, case.schedule.fingerprint());
            prop_assert_eq!(result.outcomes.len(), case.schedule.context().windows().len());
            for o in &result.outcomes {
                if let Verdict::Available(witness) = &o.verdict {
                    let next = commit(&case.schedule, &case.candidate, o.window, witness).unwrap();
                    prop_assert!(next.is_feasible());
                    prop_assert_eq!(next.order_count(), case.schedule.order_count() + 1);
                }
            }
        }
    }
}

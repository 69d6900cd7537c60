use sonospace_testkit::checks;

#[test]
fn effects_stay_finite_and_bounded_on_noise() {
    checks::dsp_stability(10.0, 21).assert();
}

#[test]
fn block_splits_do_not_change_the_output() {
    checks::block_size_independence(22).assert();
}

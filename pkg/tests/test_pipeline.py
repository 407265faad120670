import numpy as np
import pytest

from clore import raster
from clore.clicks import Click
from clore.pipeline import (ClickEngine, SessionConfig, coarse_step,
                            compute_crop_roi, refine_step, select_local_patch,
                            variance_merge)
from clore.predictor import (PredictorCapabilities, PredictorError,
                             ReferenceClickPredictor)
from clore.raster import Rect

import oracles


class StubPredictor:
    """Emits a fixed function of the input; counts calls."""

    def __init__(self, fn, concurrent_safe=True):
        self.fn = fn
        self.calls = 0
        self.capabilities = PredictorCapabilities(concurrent_safe=concurrent_safe)

    def predict(self, inp):
        self.calls += 1
        return np.asarray(self.fn(inp), np.float32)


def echo_predictor():
    return StubPredictor(lambda inp: np.asarray(inp.prev_mask, np.float32))


def constant_predictor(value):
    return StubPredictor(lambda inp: np.full(inp.dims, value, np.float32))


def red_channel_predictor():
    """'Perfect' predictor for images whose red plane encodes the target."""
    return StubPredictor(lambda inp: inp.image[:, :, 0])


def gt_image(gt):
    image = np.zeros(gt.shape + (3,), np.float32)
    image[:, :, 0] = gt
    image[:, :, 2] = 0.5
    return image


class TestComputeCropRoi:
    def cfg(self):
        return SessionConfig(working_dims=512)

    def test_first_click_full_image(self):
        roi = compute_crop_roi(np.zeros((300, 400), bool),
                               [Click(10, 10, True)], (300, 400), self.cfg())
        assert roi == Rect(0, 300, 0, 400)

    def test_expand_and_min_side(self):
        prev = np.zeros((1000, 1000), bool)
        prev[0:100, 0:100] = True
        roi = compute_crop_roi(prev, [Click(50, 50, True)], (1000, 1000), self.cfg())
        # (0,100) expanded by 1.4 -> (0,120), then grown to the 128 min side
        assert roi == Rect(0, 128, 0, 128)

    def test_full_prev_mask_full_image(self):
        prev = np.ones((600, 600), bool)
        roi = compute_crop_roi(prev, [Click(5, 5, True), Click(9, 9, True)],
                               (600, 600), self.cfg())
        assert roi == Rect(0, 600, 0, 600)

    def test_roi_contains_prev_and_clicks(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            prev = rng.random((256, 256)) < 0.002
            clicks = [Click(int(rng.integers(0, 256)), int(rng.integers(0, 256)),
                            True, i + 1) for i in range(3)]
            roi = compute_crop_roi(prev, clicks, (256, 256), self.cfg())
            box = raster.bounding_box(prev)
            if box is not None:
                assert roi.contains_rect(box)
            for c in clicks:
                assert roi.contains_point(c.y, c.x)


class TestCoarseStep:
    def test_perfect_predictor_recovers_gt(self):
        gt = np.zeros((64, 64), bool)
        gt[10:40, 15:50] = True
        cfg = SessionConfig(working_dims=64, enforce_click_consistency=False)
        prev = np.zeros((64, 64), bool)
        clicks = [Click(20, 20, True)]
        roi = compute_crop_roi(prev, clicks, (64, 64), cfg)
        out = coarse_step(gt_image(gt), prev, clicks, roi,
                          red_channel_predictor(), cfg)
        assert np.array_equal(out, gt)

    def test_all_zero_predictor_with_consistency(self):
        cfg = SessionConfig(working_dims=64)
        prev = np.zeros((64, 64), bool)
        clicks = [Click(31, 17, True)]
        roi = compute_crop_roi(prev, clicks, (64, 64), cfg)
        out = coarse_step(np.full((64, 64, 3), 0.5, np.float32), prev, clicks,
                          roi, constant_predictor(0.0), cfg)
        expected = np.zeros((64, 64), bool)
        expected[31, 17] = True
        assert np.array_equal(out, expected)

    def test_below_threshold_is_background(self):
        cfg = SessionConfig(working_dims=64, enforce_click_consistency=False)
        prev = np.zeros((64, 64), bool)
        clicks = [Click(5, 5, True)]
        roi = compute_crop_roi(prev, clicks, (64, 64), cfg)
        out = coarse_step(np.full((64, 64, 3), 0.5, np.float32), prev, clicks,
                          roi, constant_predictor(0.4999), cfg)
        assert not out.any()

    def test_outside_roi_keeps_prev_mask(self):
        prev = np.zeros((256, 256), bool)
        prev[10:30, 10:30] = True
        prev[200:220, 200:220] = True   # confirmed region far from the clicks
        cfg = SessionConfig(working_dims=256)
        clicks = [Click(20, 20, True), Click(25, 25, True)]
        near_clicks = np.zeros((256, 256), bool)
        near_clicks[10:30, 10:30] = True
        roi = compute_crop_roi(near_clicks, clicks, (256, 256), cfg)
        assert not roi.contains_point(210, 210)
        out = coarse_step(np.full((256, 256, 3), 0.5, np.float32),
                          prev, clicks, roi, constant_predictor(0.0), cfg)
        outside = np.ones((256, 256), bool)
        outside[roi.y1:roi.y2, roi.x1:roi.x2] = False
        assert np.array_equal(out[outside], prev[outside])
        inside = out[roi.y1:roi.y2, roi.x1:roi.x2]
        assert int(inside.sum()) == 2   # only the consistency-forced click pixels


class TestSelectLocalPatch:
    def test_empty_prev_uses_coarse_bbox(self):
        m_c = np.zeros((32, 32), bool)
        m_c[4:10, 4:10] = True
        m_p = np.zeros((32, 32), bool)
        out = select_local_patch(m_c, m_p, Rect(0, 32, 0, 32), (5, 5), 1.0)
        assert out == Rect(4, 10, 4, 10)

    def test_small_disagreement_triggers_click_square(self):
        m_c = np.zeros((40, 40), bool)
        m_c[0:30, 0:30] = True
        m_p = m_c.copy()
        m_p[10:13, 10:13] = False   # 3x3 hole: ratio 9/900 < 1/3
        out = select_local_patch(m_c, m_p, Rect(0, 40, 0, 40), (11, 11), 1.0)
        assert out == Rect(5, 17, 5, 17)

    def test_large_disagreement_uses_component_bbox(self):
        m_c = np.zeros((40, 40), bool)
        m_c[0:24, 0:20] = True      # coarse bbox 24x20 = 480
        m_p = m_c.copy()
        m_p[0:20, 0:15] = ~m_p[0:20, 0:15]  # 20x15 blob: 300/480 >= 1/3
        out = select_local_patch(m_c, m_p, Rect(0, 40, 0, 40), (5, 5), 1.0)
        assert out == Rect(0, 20, 0, 15)

    def test_matches_straight_line_oracle_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            h, w = (int(v) for v in rng.integers(4, 65, 2))
            m_c = rng.random((h, w)) < rng.uniform(0, 0.7)
            m_p = rng.random((h, w)) < rng.uniform(0, 0.7)
            if rng.random() < 0.3:
                m_p[:] = False
            gy1 = int(rng.integers(0, h))
            gx1 = int(rng.integers(0, w))
            r_g = Rect(gy1, int(rng.integers(gy1 + 1, h + 1)),
                       gx1, int(rng.integers(gx1 + 1, w + 1)))
            click = (int(rng.integers(0, h)), int(rng.integers(0, w)))
            gamma = float(rng.choice([1.0, 1.2, 1.4, 2.0]))
            got = select_local_patch(m_c, m_p, r_g, click, gamma)
            expected = oracles.local_patch_oracle(m_c, m_p, r_g.as_tuple(),
                                                  click, gamma)
            assert got.as_tuple() == expected

    def test_result_inside_constraints_and_contains_click(self):
        rng = np.random.default_rng(43)
        for _ in range(200):
            h = w = 48
            m_c = rng.random((h, w)) < 0.3
            m_p = rng.random((h, w)) < 0.3
            r_g = Rect(0, h, 0, w)
            y, x = (int(v) for v in rng.integers(0, 48, 2))
            out = select_local_patch(m_c, m_p, r_g, (y, x), 1.4)
            assert r_g.contains_rect(out)
            if m_p.any() and (m_c[y, x] != m_p[y, x]):
                # click inside its own disagreement component stays covered
                assert out.contains_point(y, x)


class TestRefineStep:
    def test_echo_predictor_is_idempotent(self):
        rng = np.random.default_rng(1)
        m_c = rng.random((64, 64)) < 0.4
        cfg = SessionConfig(working_dims=64, enforce_click_consistency=False)
        out = refine_step(np.full((64, 64, 3), 0.5, np.float32), m_c,
                          Rect(10, 50, 5, 45), [], echo_predictor(), cfg)
        assert np.array_equal(out, m_c)

    def test_full_image_patch_is_coarse_pass(self):
        gt = np.zeros((64, 64), bool)
        gt[20:50, 10:30] = True
        cfg = SessionConfig(working_dims=64, enforce_click_consistency=False)
        out = refine_step(gt_image(gt), np.zeros((64, 64), bool),
                          Rect(0, 64, 0, 64), [], red_channel_predictor(), cfg)
        assert np.array_equal(out, gt)

    def test_paste_semantics(self):
        gt = np.zeros((64, 64), bool)
        gt[8:56, 8:56] = True
        m_c = np.zeros((64, 64), bool)
        m_c[0:8, 0:8] = True         # wrong region outside the patch
        lp = Rect(16, 48, 16, 48)
        cfg = SessionConfig(working_dims=32, enforce_click_consistency=False)
        out = refine_step(gt_image(gt), m_c, lp, [], red_channel_predictor(), cfg)
        inside = np.zeros((64, 64), bool)
        inside[lp.y1:lp.y2, lp.x1:lp.x2] = True
        assert np.array_equal(out[inside], gt[inside])
        assert np.array_equal(out[~inside], m_c[~inside])

    def test_only_patch_clicks_encoded(self):
        seen = []

        def spy(inp):
            seen.append(int(inp.clicks.positive.sum() > 0))
            return np.asarray(inp.prev_mask, np.float32)

        cfg = SessionConfig(working_dims=32)
        clicks = [Click(60, 60, True)]   # outside the patch
        refine_step(np.full((64, 64, 3), 0.5, np.float32),
                    np.zeros((64, 64), bool), Rect(0, 32, 0, 32), clicks,
                    StubPredictor(spy), cfg)
        assert seen == [0]


class TestVarianceMerge:
    def test_no_disagreement(self):
        m = np.zeros((16, 16), bool)
        m[4:8, 4:8] = True
        out = variance_merge(m.copy(), m.copy(), Click(5, 5, True))
        assert np.array_equal(out, m)

    def test_empty_prev_accepts_refined(self):
        m_r = np.zeros((16, 16), bool)
        m_r[2:5, 2:5] = True
        m_r[10:13, 10:13] = True
        out = variance_merge(m_r, np.zeros((16, 16), bool), Click(3, 3, True))
        assert np.array_equal(out, m_r)

    def test_only_click_component_applied(self):
        m_p = np.zeros((20, 20), bool)
        m_p[0:4, 0:4] = True
        m_r = m_p.copy()
        m_r[8:12, 8:12] = True      # component A, contains the click
        m_r[16:19, 16:19] = True    # component B, discarded
        out = variance_merge(m_r, m_p, Click(9, 9, True))
        expected = m_p.copy()
        expected[8:12, 8:12] = True
        assert np.array_equal(out, expected)

    def test_click_outside_disagreement_accepts_refined(self):
        m_p = np.zeros((16, 16), bool)
        m_p[0:4, 0:4] = True
        m_r = m_p.copy()
        m_r[10:12, 10:12] = True
        out = variance_merge(m_r, m_p, Click(0, 0, True))  # pixel unchanged
        assert np.array_equal(out, m_r)

    def test_flip_on_component_oracle_randomized(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            h, w = (int(v) for v in rng.integers(2, 40, 2))
            m_p = rng.random((h, w)) < 0.5
            m_r = rng.random((h, w)) < 0.5
            y, x = int(rng.integers(0, h)), int(rng.integers(0, w))
            out = variance_merge(m_r, m_p, Click(y, x, True))
            if not m_p.any():
                assert np.array_equal(out, m_r)
                continue
            diff = m_r ^ m_p
            comps = oracles.flood_fill_components(diff)
            holding = [c for c in comps if (y, x) in c]
            if not holding:
                assert np.array_equal(out, m_r)
                continue
            expected = m_p.copy()
            for py, px in holding[0]:
                expected[py, px] = m_r[py, px]
            assert np.array_equal(out, expected)


def run_scripted_session(engine, image, n_clicks, rng):
    state = engine.new_session(image)
    outputs = []
    h, w = state.dims
    for i in range(n_clicks):
        y, x = int(rng.integers(0, h)), int(rng.integers(0, w))
        outputs.append(engine.add_click(state, y, x, bool(i % 3 != 2)))
    return state, outputs


class TestAddClick:
    def make_engine(self, n_trigger=5, predictor=None):
        cfg = SessionConfig(n_trigger=n_trigger, working_dims=64)
        if predictor is None:
            predictor = ReferenceClickPredictor()
        return ClickEngine(predictor, cfg)

    def test_phase_gate_around_trigger(self):
        engine = self.make_engine(n_trigger=5)
        rng = np.random.default_rng(0)
        _, outputs = run_scripted_session(
            engine, np.full((64, 64, 3), 0.5, np.float32), 7, rng)
        assert [o.phase for o in outputs[:5]] == ["coarse"] * 5
        assert outputs[5].phase == "refined"
        assert outputs[5].local_patch is not None
        assert outputs[6].phase == "refined"

    def test_trigger_one_second_click_refined(self):
        engine = self.make_engine(n_trigger=1)
        state = engine.new_session(np.full((64, 64, 3), 0.5, np.float32))
        first = engine.add_click(state, 30, 30, True)
        second = engine.add_click(state, 10, 10, False)
        assert first.phase == "coarse" and first.local_patch is None
        assert second.phase == "refined" and second.local_patch is not None

    def test_phase_law_all_triggers(self):
        for n in range(1, 9):
            engine = self.make_engine(n_trigger=n)
            rng = np.random.default_rng(n)
            _, outputs = run_scripted_session(
                engine, np.full((48, 48, 3), 0.5, np.float32), 10, rng)
            for i, out in enumerate(outputs, start=1):
                assert (out.phase == "coarse") == (i <= n)
                assert (out.local_patch is not None) == (out.phase == "refined")

    def test_click_consistency_invariant(self):
        engine = self.make_engine()
        rng = np.random.default_rng(5)
        state, _ = run_scripted_session(
            engine, rng.random((64, 64, 3)).astype(np.float32), 10, rng)
        for c in state.clicks:
            assert state.cur_mask[c.y, c.x] == c.positive

    def test_predictor_call_counts(self):
        predictor = StubPredictor(lambda inp: inp.image[:, :, 0] * 0.6)
        engine = self.make_engine(n_trigger=3, predictor=predictor)
        state = engine.new_session(np.full((64, 64, 3), 0.5, np.float32))
        rng = np.random.default_rng(1)
        counts = []
        for i in range(6):
            before = predictor.calls
            engine.add_click(state, int(rng.integers(0, 64)),
                             int(rng.integers(0, 64)), True)
            counts.append(predictor.calls - before)
        assert counts == [1, 1, 1, 2, 2, 2]

    def test_deterministic_mask_sequence(self):
        rng = np.random.default_rng(9)
        image = rng.random((64, 64, 3)).astype(np.float32)
        script = [(int(rng.integers(0, 64)), int(rng.integers(0, 64)),
                   bool(rng.random() < 0.7)) for _ in range(8)]

        def run():
            engine = self.make_engine()
            state = engine.new_session(image)
            return [engine.add_click(state, y, x, p).mask.tobytes()
                    for y, x, p in script]

        assert run() == run()

    def test_predictor_error_leaves_state_unchanged(self):
        calls = {"n": 0}

        def flaky(inp):
            calls["n"] += 1
            if calls["n"] >= 3:
                raise PredictorError("backend gone")
            return np.full(inp.dims, 0.6, np.float32)

        engine = self.make_engine(n_trigger=5, predictor=StubPredictor(flaky))
        state = engine.new_session(np.full((64, 64, 3), 0.5, np.float32))
        engine.add_click(state, 10, 10, True)
        engine.add_click(state, 20, 20, True)
        snapshot = (list(state.clicks), state.cur_mask.copy(),
                    state.prev_mask.copy(), state.crop_roi,
                    len(state.undo_stack), list(state.timing_log))
        with pytest.raises(PredictorError):
            engine.add_click(state, 30, 30, True)
        assert state.clicks == snapshot[0]
        assert np.array_equal(state.cur_mask, snapshot[1])
        assert np.array_equal(state.prev_mask, snapshot[2])
        assert state.crop_roi == snapshot[3]
        assert len(state.undo_stack) == snapshot[4]
        assert state.timing_log == snapshot[5]

    def test_out_of_bounds_click_rejected(self):
        engine = self.make_engine()
        state = engine.new_session(np.full((32, 32, 3), 0.5, np.float32))
        with pytest.raises(ValueError):
            engine.add_click(state, -1, 0, True)
        with pytest.raises(ValueError):
            engine.add_click(state, 0, 32, True)
        assert state.click_count == 0

    def test_shared_predictor_identity(self):
        predictor = ReferenceClickPredictor()
        engine = ClickEngine(predictor, SessionConfig(working_dims=64))
        assert engine.predictor is predictor
        # both phases route through the same object: counted above in
        # test_predictor_call_counts; here assert no second instance exists
        assert all(not isinstance(v, ReferenceClickPredictor)
                   for k, v in vars(engine).items() if k != "predictor")


class TestUndo:
    def make_engine(self):
        return ClickEngine(ReferenceClickPredictor(),
                           SessionConfig(working_dims=48))

    def state_fingerprint(self, state):
        return (tuple(state.clicks), state.cur_mask.tobytes(),
                state.prev_mask.tobytes(), state.crop_roi,
                state.phase, state.local_patch)

    def test_add_then_undo_restores_exactly(self):
        engine = self.make_engine()
        state = engine.new_session(np.full((48, 48, 3), 0.5, np.float32))
        engine.add_click(state, 10, 10, True)
        before = self.state_fingerprint(state)
        engine.add_click(state, 20, 20, False)
        engine.undo(state)
        assert self.state_fingerprint(state) == before

    def test_two_adds_one_undo(self):
        engine = self.make_engine()
        state = engine.new_session(np.full((48, 48, 3), 0.5, np.float32))
        engine.add_click(state, 10, 10, True)
        after_first = self.state_fingerprint(state)
        engine.add_click(state, 30, 30, True)
        out = engine.undo(state)
        assert self.state_fingerprint(state) == after_first
        assert np.array_equal(out.mask, state.cur_mask)

    def test_undo_fresh_session_errors(self):
        engine = self.make_engine()
        state = engine.new_session(np.full((48, 48, 3), 0.5, np.float32))
        with pytest.raises(IndexError):
            engine.undo(state)

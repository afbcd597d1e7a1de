"""Dataset pipeline tests: ingestion diagnostics, slicing filters, clustering.

The weave builder manufactures recordings whose per-episode crossing
pattern is chosen up front: agents sit on parallel drift lines 3 m apart
and swap adjacent lines once per scripted letter, with a +/-1 m lateral
excursion at the meeting instant picking the crossing sign.  A common
0.5 m/s drift keeps every agent past the stationary filter without
changing any pairwise difference.
"""

import io
import csv
import statistics

import numpy as np
import pytest

from braidkit.dataset import (
    EpisodeConfig,
    analyze_directory,
    analyze_scene,
    ingest,
    slice_episodes,
    write_braid_frequency_csv,
    write_scene_report_csv,
    write_tc_cdf_csv,
)
from braidkit.loops import topological_complexity
from braidkit.trajectories import align, trajectory
from braidkit.words import format_word, relation_simplify, word


def weave_rows(blocks, n, *, block=10.0, lead=0.5, spacing=3.0, drift=0.5):
    """CSV rows (with header) where block k performs the word ``blocks[k]``.

    Each agent keeps a small distinct resting depth (0.1 m apart) so the
    depth axis never degenerates; crossing signs still come from the
    +/-1 m excursions, which dominate the baseline differences.
    """

    def x_slot(s, t):
        return s * spacing + drift * t

    occupant = list(range(n))  # occupant[slot] = agent index
    frames = {k: [] for k in range(n)}

    def emit(k, t, x, y):
        if frames[k] and frames[k][-1][0] == t:
            return
        frames[k].append((t, x, y + 0.1 * k))

    t_end = 0.0
    for b, letters in enumerate(blocks):
        t0 = b * block
        slot_of = {occupant[s]: s for s in range(n)}
        for k in range(n):
            emit(k, t0, x_slot(slot_of[k], t0), 0.0)
        seg = (block - 2 * lead) / max(len(letters), 1)
        for idx, letter in enumerate(letters):
            s0 = t0 + lead + idx * seg
            sm, s1 = s0 + seg / 2, s0 + seg
            lo, hi = abs(letter) - 1, abs(letter)
            a_lo, a_hi = occupant[lo], occupant[hi]
            sgn = 1.0 if letter > 0 else -1.0
            xm = (lo + hi) / 2 * spacing + drift * sm
            emit(a_lo, s0, x_slot(lo, s0), 0.0)
            emit(a_lo, sm, xm, +sgn)
            emit(a_lo, s1, x_slot(hi, s1), 0.0)
            emit(a_hi, s0, x_slot(hi, s0), 0.0)
            emit(a_hi, sm, xm, -sgn)
            emit(a_hi, s1, x_slot(lo, s1), 0.0)
            occupant[lo], occupant[hi] = a_hi, a_lo
        t_end = t0 + block
    slot_of = {occupant[s]: s for s in range(n)}
    for k in range(n):
        emit(k, t_end, x_slot(slot_of[k], t_end), 0.0)

    rows = [("agent_id", "t", "x", "y")]
    for k in range(n):
        for t, x, y in frames[k]:
            rows.append((f"w{k + 1}", f"{t:.6f}", f"{x:.6f}", f"{y:.6f}"))
    return rows


def as_stream(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    buf.seek(0)
    return buf


def csv_text(text):
    return io.StringIO(text)


WEAVE_TEMPLATES = ((1,), (-1,), (1, 2), (2, -1))


def weave_scene(copies=15):
    blocks = [w for w in WEAVE_TEMPLATES for _ in range(copies)]
    return weave_rows(blocks, 3)


# --------------------------------------------------------------------------
# ingestion
# --------------------------------------------------------------------------


def test_ingest_drone_style_recording():
    # 2 agents x 250 rows at 25 fps give two ~10 s trajectories
    rows = [("agent_id", "t", "x", "y")]
    for k in range(250):
        t = k / 25
        rows.append(("car1", f"{t}", f"{t}", "0.0"))
        rows.append(("car2", f"{t}", f"{t}", "5.0"))
    res = ingest(as_stream(rows))
    assert res.clean
    assert [t.agent_id for t in res.trajectories] == ["car1", "car2"]
    for t in res.trajectories:
        assert len(t) == 250
        assert t.times[-1] - t.times[0] == pytest.approx(249 / 25)


def test_ingest_five_column_schema_orders_by_frame():
    res = ingest(
        csv_text(
            "agent_id,frame,t,x,y\n"
            "a,2,0.2,2.0,0.0\n"
            "a,1,0.1,1.0,0.0\n"
            "a,3,0.3,3.0,0.0\n"
        )
    )
    assert res.clean
    assert np.allclose(res.trajectories[0].points[:, 0], [1.0, 2.0, 3.0])


def test_ingest_headerless_positional_schemas():
    four = ingest(csv_text("a,0.0,0.0,0.0\na,1.0,1.0,0.0\n"))
    assert four.clean and len(four.trajectories[0]) == 2
    five = ingest(csv_text("a,0,0.0,0.0,0.0\na,1,1.0,1.0,0.0\n"))
    assert five.clean and len(five.trajectories[0]) == 2


def test_ingest_unsorted_rows_are_sortable():
    res = ingest(
        csv_text("agent_id,t,x,y\nb,1.0,9.0,0\na,1.0,1.0,0\nb,0.0,8.0,0\na,0.0,0.0,0\n")
    )
    assert res.clean
    assert [t.agent_id for t in res.trajectories] == ["a", "b"]
    assert np.all(np.diff(res.trajectories[1].times) > 0)


def test_ingest_reports_malformed_rows_with_line_numbers():
    res = ingest(
        csv_text(
            "agent_id,t,x,y\n"
            "a,0.0,0.0,0.0\n"
            "a,oops,1.0,0.0\n"
            "a,1.0,1.0\n"
            "a,1.0,1.0,0.0\n"
        )
    )
    assert [line for line, _ in res.rejected_rows] == [3, 4]
    assert len(res.trajectories[0]) == 2


def test_ingest_counts_duplicate_samples():
    res = ingest(
        csv_text(
            "agent_id,t,x,y\na,0.0,0.0,0.0\na,0.0,9.9,9.9\na,1.0,1.0,0.0\n"
        )
    )
    assert res.duplicates == 1
    assert res.rejected_rows[0][0] == 3
    # first occurrence wins
    assert res.trajectories[0].points[0, 0] == 0.0


def test_ingest_rejects_agent_with_backward_clock():
    res = ingest(
        csv_text(
            "agent_id,frame,t,x,y\n"
            "bad,1,0.0,0.0,0.0\n"
            "bad,2,2.0,1.0,0.0\n"
            "bad,3,1.0,2.0,0.0\n"
            "good,1,0.0,0.0,5.0\n"
            "good,2,1.0,1.0,5.0\n"
        )
    )
    assert [a for a, _ in res.rejected_agents] == ["bad"]
    assert [t.agent_id for t in res.trajectories] == ["good"]


def test_ingest_rejects_single_sample_agent():
    res = ingest(csv_text("agent_id,t,x,y\nlone,0.0,0.0,0.0\na,0,0,1\na,1,1,1\n"))
    assert ("lone", "fewer than two samples") in res.rejected_agents


def test_ingest_empty_stream():
    res = ingest(csv_text(""))
    assert res.clean and res.trajectories == ()
    assert slice_episodes(res.trajectories) == []


# --------------------------------------------------------------------------
# episode slicing
# --------------------------------------------------------------------------


def _mover(agent_id, x, t0=0.0, t1=35.0, steps=71):
    ts = np.linspace(t0, t1, steps)
    return trajectory(agent_id, [(t, x, t) for t in ts])


def test_recording_tiles_into_full_windows():
    eps = slice_episodes([_mover("a", 0.0), _mover("b", 3.0)])
    assert len(eps) == 3
    assert [(e.t_start, e.t_end) for e in eps] == [(0, 10), (10, 20), (20, 30)]


def test_sliding_windows_behind_stride_flag():
    cfg = EpisodeConfig(stride=5.0)
    eps = slice_episodes([_mover("a", 0.0), _mover("b", 3.0)], cfg)
    assert [e.t_start for e in eps] == [0, 5, 10, 15, 20, 25]


def test_parked_agent_removed_by_moving_filter():
    parked = trajectory("p", [(t, 1.5, 5.0) for t in np.linspace(0, 35, 71)])
    eps = slice_episodes([_mover("a", 0.0), _mover("b", 3.0), parked])
    assert all(e.agent_ids == ("a", "b") for e in eps)


def test_isolated_pair_discards_episode():
    # always 50 m apart: each one's nearest neighbor is too far
    eps = slice_episodes([_mover("a", 0.0), _mover("b", 50.0)])
    assert eps == []


def test_moving_filter_can_cascade_into_isolation():
    # p is parked next to c; once p is dropped, c is alone and goes too
    parked = trajectory("p", [(t, 20.0, 17.5) for t in np.linspace(0, 35, 71)])
    eps = slice_episodes(
        [_mover("a", 0.0), _mover("b", 3.0), _mover("c", 15.0), parked]
    )
    assert eps and all(e.agent_ids == ("a", "b") for e in eps)


def test_agents_must_cover_the_full_window():
    short = _mover("c", 6.0, t0=0.0, t1=25.0, steps=51)
    eps = slice_episodes([_mover("a", 0.0), _mover("b", 3.0), short])
    assert [e.n_agents for e in eps] == [3, 3, 2]


def test_config_validation():
    for bad in (
        dict(episode_duration=0),
        dict(min_pairwise_distance=-1),
        dict(stationary_speed_threshold=0),
        dict(stride=0.0),
    ):
        with pytest.raises(ValueError):
            EpisodeConfig(**bad)


# --------------------------------------------------------------------------
# scene analysis
# --------------------------------------------------------------------------


def test_crossing_free_scene_is_one_identity_cluster():
    res = ingest(as_stream(weave_rows([()] * 3, 2)))
    eps = slice_episodes(res.trajectories)
    rep = analyze_scene(eps, scene="calm")
    assert rep.episodes == 3
    assert rep.unique_braids == 1
    assert rep.braid_frequency[0].word_text == format_word(word(2))
    assert rep.tc_mean == 0.0


def test_opposite_crossings_are_distinct_clusters():
    res = ingest(as_stream(weave_rows([(1,), (-1,)], 2)))
    rep = analyze_scene(slice_episodes(res.trajectories))
    assert rep.unique_braids == 2


def test_twenty_copies_of_one_weave_cluster_together():
    res = ingest(as_stream(weave_rows([(1, 2)] * 20, 3)))
    rep = analyze_scene(slice_episodes(res.trajectories))
    assert rep.episodes == 20
    assert rep.unique_braids == 1
    expected = topological_complexity(relation_simplify(word(3, (1, 2)))).tc
    assert rep.braid_frequency[0].tc == pytest.approx(expected, abs=1e-12)
    assert rep.tc_mean == pytest.approx(expected, abs=1e-12)
    assert rep.tc_sd == 0.0


def test_clusters_merge_words_the_simplifier_identifies():
    # distant strands commute: 1 3 -1 simplifies to the single letter 3
    assert relation_simplify(word(4, (1, 3, -1))) == word(4, (3,))
    res = ingest(as_stream(weave_rows([(1, 3, -1), (3,)], 4)))
    rep = analyze_scene(slice_episodes(res.trajectories))
    assert rep.episodes == 2
    assert rep.unique_braids == 1


def test_unreadable_episode_is_skipped_and_counted():
    # both agents stay at depth 0: the meeting is an exact head-on and
    # the depth axis is degenerate; either way the pattern is unreadable
    a = trajectory("a", [(0.0, 0.0, 0.0), (10.0, 3.0, 0.0)])
    b = trajectory("b", [(0.0, 3.0, 0.0), (10.0, 0.0, 0.0)])
    rep = analyze_scene([align([a, b])])
    assert rep.episodes == 0
    assert rep.skipped == 1


def test_weave_templates_report():
    rep = analyze_scene(slice_episodes(ingest(as_stream(weave_scene())).trajectories))
    assert rep.episodes == 60
    assert rep.skipped == 0
    assert rep.unique_braids == len(WEAVE_TEMPLATES)
    assert (rep.agents_mean, rep.agents_sd) == (3.0, 0.0)
    assert all(c.count == 15 and c.fraction == 0.25 for c in rep.braid_frequency)
    # per-template complexity agrees with the score computed directly
    expected = sorted(
        (
            topological_complexity(relation_simplify(word(3, tpl))).tc,
            format_word(relation_simplify(word(3, tpl))),
        )
        for tpl in WEAVE_TEMPLATES
    )
    got = [(c.tc, c.word_text) for c in rep.braid_frequency]
    assert got == expected
    # moments over the 60 per-episode values, computed independently
    values = [tc for tc, _ in expected for _ in range(15)]
    assert rep.tc_mean == pytest.approx(statistics.fmean(values), abs=1e-12)
    assert rep.tc_sd == pytest.approx(statistics.pstdev(values), abs=1e-12)


def test_cdf_is_monotone_and_ends_at_one():
    rep = analyze_scene(slice_episodes(ingest(as_stream(weave_scene())).trajectories))
    fracs = [f for _, f in rep.tc_cdf]
    assert all(b > a for a, b in zip(fracs, fracs[1:]))
    assert fracs[-1] == 1.0
    values = [v for v, _ in rep.tc_cdf]
    assert values == sorted(values)
    assert rep.unique_braids <= rep.episodes


def test_frequency_table_ordered_by_complexity():
    rep = analyze_scene(slice_episodes(ingest(as_stream(weave_scene())).trajectories))
    tcs = [c.tc for c in rep.braid_frequency]
    assert tcs == sorted(tcs)
    assert sum(c.fraction for c in rep.braid_frequency) == pytest.approx(1.0)


# --------------------------------------------------------------------------
# directory pipeline and writers
# --------------------------------------------------------------------------


def _write_scene(path, rows):
    with path.open("w", newline="") as fp:
        csv.writer(fp, lineterminator="\n").writerows(rows)


def test_analyze_directory_in_name_order(tmp_path):
    _write_scene(tmp_path / "b_weave.csv", weave_rows([(1,)] * 2, 2))
    _write_scene(tmp_path / "a_calm.csv", weave_rows([()] * 2, 2))
    out = analyze_directory(tmp_path)
    assert [a.scene for a in out] == ["a_calm", "b_weave"]
    assert out[0].ingest.clean and out[1].ingest.clean
    assert out[0].report.tc_mean == 0.0
    assert out[1].report.unique_braids == 1


def test_reports_and_writers_are_deterministic(tmp_path):
    _write_scene(tmp_path / "scene.csv", weave_scene(copies=3))
    outputs = []
    for _ in range(2):
        analyses = analyze_directory(tmp_path)
        reports = [a.report for a in analyses]
        bufs = [io.StringIO() for _ in range(3)]
        write_scene_report_csv(reports, bufs[0])
        write_tc_cdf_csv(reports, bufs[1])
        write_braid_frequency_csv(reports, bufs[2])
        outputs.append(tuple(b.getvalue() for b in bufs))
    assert outputs[0] == outputs[1]
    header = outputs[0][0].splitlines()[0]
    assert header.startswith("scene,episodes,skipped,")
    assert outputs[0][1].splitlines()[0] == "scene,tc,cumulative_fraction"
    assert len(outputs[0][2].splitlines()) == 1 + 4  # header + one row per cluster

import pytest

from sgcat.harness.bench import (
    DISCLAIMER, bench_report, load_reference, parse_results, read_results, summarize, transposed_cases,
)

REF_KF_LATENCY = [5.5, 5.7, 5.5, 5.5, 7.5, 5.1, 5.1, 5.5, 5.4]


def test_reference_cells_are_verbatim():
    ref = load_reference()
    assert [r.case_id for r in ref] == [str(i) for i in range(1, 10)]
    assert [r["t_trip"] for r in ref] == ["91.2", "106.3", "128.1", "158.5"] + ["OT"] * 5
    assert ref[8]["t_det_np"] == "-"
    assert ref[4]["t_det_qsvm"] == "FP"
    assert ref[3]["ft_spoof"] == "1256.69"


def test_reference_latencies_and_mean():
    s = summarize(load_reference())
    kf = [row["t_det_kf"] for row in s.latencies]
    assert kf == pytest.approx(REF_KF_LATENCY, abs=1e-9)
    assert s.mean_latency["t_det_kf"] == pytest.approx(50.8 / 9, abs=1e-9)
    assert s.fp_counts["t_det_qsvm"] == 1 and s.miss_counts["t_det_np"] == 1
    assert s.latencies[4]["t_det_qsvm"] == "FP" and s.latencies[8]["t_det_np"] is None
    assert s.rankings[0][0] == "KF"


def test_transposed_cases_flagged():
    ref = load_reference()
    assert transposed_cases(ref) == ["6", "7", "8", "9"]
    report = bench_report(ref[:5], ref)
    assert any("reference cases 6, 7, 8, 9" in f for f in report.flags)
    assert not any(f.startswith("input") for f in report.flags)


def test_render_keeps_markers_in_place():
    ref = load_reference()
    text = bench_report(ref, ref).render()
    assert text.startswith(DISCLAIMER)
    section = text.split("Reference cases (verbatim)")[1].split("Side by side")[0]
    line = lambda label: next(l for l in section.splitlines() if l.startswith(label)).split()[2:]
    assert line("t_trip") == ["91.2", "106.3", "128.1", "158.5", "OT", "OT", "OT", "OT", "OT"]
    assert line("t_detection,NP")[-1] == "-"
    assert line("t_detection,qSVM")[4] == "FP"
    assert "OT | OT" in text and "FP | FP" in text
    assert "KF 5.64" in text


def test_results_roundtrip_and_missing_columns(tmp_path):
    text = ("case_id,lt_spoof,ft_spoof,t_insertion_lt,t_insertion_ft,t_trip,t_det_kf,t_det_osv,t_det_np,"
            "t_det_svm,t_det_qsvm,outcome\n1,64.1,1327.5,3.0,3.0,90.3,6.7,9.5,FP,-,,Tripped\n")
    p = tmp_path / "r.csv"
    p.write_text(text)
    rec = read_results(p)
    assert rec[0].latency("t_det_kf") == pytest.approx(3.7)
    assert rec[0].latency("t_det_np") == "FP" and rec[0].latency("t_det_svm") is None
    s = summarize(rec)
    assert s.miss_counts["t_det_svm"] == 1 and s.miss_counts["t_det_qsvm"] == 0
    with pytest.raises(ValueError):
        parse_results("case_id,lt_spoof\n1,2\n")


def test_negative_latency_without_marker_flagged():
    rec = parse_results("case_id,lt_spoof,ft_spoof,t_insertion_lt,t_insertion_ft,t_trip,t_det_kf,t_det_osv,"
                        "t_det_np,t_det_svm,t_det_qsvm\n1,60,1200,5,5,OT,2.0,-,-,-,-\n")
    assert any("negative KF latency" in f for f in bench_report(rec).flags)


def test_empty_input_rejected():
    with pytest.raises(ValueError):
        bench_report([])

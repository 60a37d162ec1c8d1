from __future__ import annotations

import json
import subprocess
import sys

import pytest

from rsphunt.cli import EXIT_ERROR, EXIT_OK, EXIT_USAGE
from rsphunt.config import load_config
from rsphunt.domains import apex_domain
from rsphunt.errors import ConfigError, EmptyStoreError, RankingFileError
from rsphunt.lang import tag_language
from rsphunt.records import CategoryLabel, IptRecord
from rsphunt.reflection import instantiate, urs_from_template
from rsphunt.report import (
    build_report,
    load_ranking,
    report_category_distribution,
    report_popularity_overlap,
    report_top_abused,
)
from rsphunt.synth import multilabel_corpus

from conftest import T0
from pipeline import copy_fixtures, run

G, S = CategoryLabel.GAMBLING, CategoryLabel.SEX


def put(store, text, labels=(), url="https://a.example.com/s?q=x"):
    rec = IptRecord.new(text, T0, sources=(("mock", url),), categories=frozenset(labels), language=tag_language(text))
    store.append(rec)
    return rec


# -- category and language ---------------------------------------------------


def test_category_shares(store):
    for i in range(3):
        put(store, f"bet {i}", [G])
    put(store, "escort", [S])
    table = report_category_distribution(store)
    assert table.rows == [["Gambling", 3, 75.0], ["Sex Service", 1, 25.0]]


def test_multi_label_ipt_counts_under_each_label(store):
    put(store, "both", [G, S])
    put(store, "one", [G])
    rows = {r[0]: r[1] for r in report_category_distribution(store).rows}
    assert rows == {"Gambling": 2, "Sex Service": 1}


def test_empty_store_reports_raise(store):
    with pytest.raises(EmptyStoreError):
        report_category_distribution(store)
    put(store, "unlabelled")
    with pytest.raises(EmptyStoreError):
        report_category_distribution(store)


def test_language_tags():
    assert tag_language("百家乐开户") == "zh"
    assert tag_language("hello there") == "und-Latn"
    assert tag_language("12345 !!") == "und"
    assert tag_language("カジノ日本") == "ja"


def test_apex_domains():
    assert apex_domain("www.bbc.co.uk") == "bbc.co.uk"
    assert apex_domain("search.bilibili.com") == "bilibili.com"
    assert apex_domain("localhost") == "localhost"


# -- URS abuse -----------------------------------------------------------------


def skewed_store(store):
    """Nine IPTs on one URS and one on another."""
    hot = "https://hot.example.com/s?q={R}"
    cold = "https://cold.example.org/find/{R}"
    store.append(urs_from_template(hot))
    store.append(urs_from_template(cold))
    for i in range(9):
        put(store, f"hot ipt {i}", [G], url=instantiate(hot, f"hot ipt {i}"))
    put(store, "cold ipt", [G], url=instantiate(cold, "cold ipt"))


def test_top_urs_share_and_cumulative(store):
    skewed_store(store)
    urs, apex, cum = report_top_abused(store)
    assert urs.rows[0][:3] == ["https://hot.example.com/s?q={R}", 9, 90.0]
    assert apex.rows[0][0] == "example.com" and apex.rows[1][0] == "example.org"
    assert cum.rows[0] == ["top 5%", 1, 90.0, 90.0]
    shares = urs.column("% IPTs")
    assert shares == sorted(shares, reverse=True)
    assert sum(shares) == pytest.approx(100.0)


def test_top_n_limits_rows(store):
    skewed_store(store)
    urs, apex, _ = report_top_abused(store, n=1)
    assert len(urs.rows) == 1 and len(apex.rows) == 1


# -- popularity ----------------------------------------------------------------


def test_popularity_two_of_four(store, tmp_path):
    for i, host in enumerate(["www.popular.com", "m.famous.net", "obscure1.xyz", "obscure2.xyz"]):
        put(store, f"ipt {i}", [G], url=f"https://{host}/s?q=ipt+{i}")
    ranking = tmp_path / "rank.txt"
    ranking.write_text("popular.com\nfiller.com\nfamous.net\n", encoding="utf-8")
    table = report_popularity_overlap(store, ranking, thresholds=[1, 3, 1000])
    assert table.rows == [["top 1", 1, 25.0, 25.0], ["top 3", 2, 50.0, 50.0], ["top 1000", 2, 50.0, 50.0]]


def test_popularity_zero_match_row(store, tmp_path):
    put(store, "ipt", [G], url="https://nowhere.xyz/s?q=ipt")
    ranking = tmp_path / "rank.txt"
    ranking.write_text("popular.com\n", encoding="utf-8")
    assert report_popularity_overlap(store, ranking, thresholds=[100]).rows == [["top 100", 0, 0.0, 0.0]]


def test_ranking_file_errors(tmp_path):
    with pytest.raises(RankingFileError):
        load_ranking(tmp_path / "missing.txt")
    (tmp_path / "r.csv").write_text("1,a.com\n2,b.com\n", encoding="utf-8")
    assert load_ranking(tmp_path / "r.csv") == {"a.com": 1, "b.com": 2}


def test_reports_are_deterministic_and_csv(store):
    skewed_store(store)
    a = build_report(store, "top-abused", "csv")
    assert a == build_report(store, "top-abused", "csv")
    assert a.splitlines()[0] == "urs,IPTs,% IPTs,RSPs,% RSPs"
    with pytest.raises(RankingFileError):
        build_report(store, "popularity")


# -- config --------------------------------------------------------------------


def test_config_paths_resolve_against_config_dir(fixtures_dir, tmp_path):
    config = copy_fixtures(fixtures_dir, tmp_path / "w")
    cfg = load_config(config)
    assert cfg.store_path == config.parent / "store"
    assert cfg.clock().now() == T0
    bad = tmp_path / "bad.toml"
    bad.write_text("[hunt]\nmax_rounds = -1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)


# -- CLI -----------------------------------------------------------------------


def test_usage_error_exit_code():
    assert run(["report", "--kind", "nope"])[0] == EXIT_USAGE
    assert run([])[0] == EXIT_USAGE


def test_missing_seed_file_is_an_error(fixtures_dir, tmp_path, models_dir, capsys):
    config = copy_fixtures(fixtures_dir, tmp_path / "w")
    code, _ = run(["hunt", "--config", str(config), "--models", str(models_dir),
                   "--seeds-keywords", str(tmp_path / "nope.txt")])
    assert code == EXIT_ERROR
    assert "not found" in capsys.readouterr().err


def test_report_on_empty_store_is_an_error(tmp_path):
    code, _ = run(["report", "--store", str(tmp_path / "empty"), "--kind", "categories"])
    assert code == EXIT_ERROR


def test_classify_input_mode(tmp_path, models_dir):
    texts = tmp_path / "t.txt"
    texts.write_text("【百家乐】⭐真人荷官⭐在线赌场【加vx:h7b3pdkhx46】\nthe library opens at nine\n", encoding="utf-8")
    code, out = run(["classify", "--models", str(models_dir), "--store", str(tmp_path / "s"), "--input", str(texts)])
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["is_ipt"] for r in rows] == [True, False]
    assert "Gambling" in rows[0]["labels"] and rows[1]["labels"] == ["Benign"]


def test_train_and_eval_commands(tmp_path):
    data = tmp_path / "ml.jsonl"
    rows = multilabel_corpus(n=240, seed=1)
    data.write_text("".join(json.dumps({"text": t, "labels": sorted(x.value for x in ls)}, ensure_ascii=False) + "\n"
                            for t, ls in rows), encoding="utf-8")
    model = tmp_path / "ml.json"
    code, _ = run(["train", "--task", "multilabel", "--data", str(data), "--out", str(model), "--seed", "0"])
    assert code == EXIT_OK and model.is_file()
    code, out = run(["eval", "--task", "multilabel", "--model", str(model), "--data", str(data)])
    assert code == EXIT_OK
    report = json.loads(out)
    assert 0.0 <= report["lrap"] <= 1.0 and report["micro_f1"] > 0.5


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "rsphunt.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("rsphunt")

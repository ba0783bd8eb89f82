"""Workload parsing, trace rendering, and the command-line surface."""

import pytest

from osalg import WorkClass
from osalg.cli import (
    EXIT_OK,
    EXIT_UNRUNNABLE,
    EXIT_USAGE,
    EXIT_WORKLOAD,
    emit_workload,
    main,
    parse_workload,
)
from osalg.errors import WorkloadError

TWO_RECORDS = """\
# two batch procedures
id=1 size=4 time=3 arrival=0
id=2 size=4 time=2 arrival=0
"""

FULL_RECORD = (
    "id=5 size=10 time=4 arrival=2 priority=3 owner=ops "
    "class=IoBound segments=4,6\n"
)


class TestParseWorkload:
    def test_two_record_file(self):
        ps = parse_workload(TWO_RECORDS)
        assert [p.id for p in ps] == [1, 2]
        assert ps[0].size == 4 and ps[0].time == 3

    def test_all_fields_parse(self):
        (p,) = parse_workload(FULL_RECORD)
        assert (p.priority, p.owner) == (3, "ops")
        assert p.io_class is WorkClass.IO_BOUND
        assert p.segments == (4, 6)

    def test_arrival_defaults_to_zero(self):
        (p,) = parse_workload("id=1 size=1 time=1\n")
        assert p.arrival == 0

    def test_sorted_by_arrival_then_id(self):
        text = "id=2 size=1 time=1 arrival=5\nid=1 size=1 time=1 arrival=0\n"
        assert [p.id for p in parse_workload(text)] == [1, 2]

    def test_duplicate_id_names_it(self):
        text = "id=3 size=1 time=1\nid=3 size=2 time=1\n"
        with pytest.raises(WorkloadError, match="duplicate id 3") as exc:
            parse_workload(text)
        assert exc.value.line == 2

    def test_zero_time_names_the_field(self):
        with pytest.raises(WorkloadError, match="time must be >= 1") as exc:
            parse_workload("id=1 size=1 time=0\n")
        assert exc.value.line == 1

    def test_syntax_error_carries_line_number(self):
        with pytest.raises(WorkloadError) as exc:
            parse_workload("id=1 size=4 time=2\nwhat is this\n")
        assert exc.value.line == 2

    def test_unknown_field_rejected(self):
        with pytest.raises(WorkloadError, match="unknown field"):
            parse_workload("id=1 size=1 time=1 color=red\n")

    def test_comments_and_blanks_skipped(self):
        ps = parse_workload("\n# comment\nid=1 size=1 time=1  # trailing\n\n")
        assert len(ps) == 1

    def test_round_trip_is_semantically_identical(self):
        original = parse_workload(TWO_RECORDS + FULL_RECORD)
        again = parse_workload(emit_workload(original))
        assert list(again) == list(original)


class TestMainRun:
    def workload_path(self, tmp_path, text=TWO_RECORDS):
        path = tmp_path / "w.txt"
        path.write_text(text)
        return str(path)

    def test_run_to_files(self, tmp_path, capsys):
        wpath = self.workload_path(tmp_path)
        tpath, mpath = tmp_path / "t.csv", tmp_path / "m.txt"
        code = main([
            "run", "--workload", wpath, "--scheduler", "fcfs",
            "--allocator", "first-fit", "--memory", "64",
            "--trace", str(tpath), "--metrics", str(mpath),
        ])
        assert code == EXIT_OK
        trace_text = tpath.read_text()
        assert trace_text.startswith("instant,event,pid,detail\n")
        assert "Dispatch" in trace_text
        assert "makespan=5" in mpath.read_text()

    def test_run_to_stdout(self, tmp_path, capsys):
        wpath = self.workload_path(tmp_path)
        code = main([
            "run", "--workload", wpath, "--scheduler", "sjf-time",
            "--allocator", "buddy", "--memory", "64",
        ])
        captured = capsys.readouterr()
        assert code == EXIT_OK
        assert captured.out.startswith("instant,event,pid,detail\n")
        assert "mean_waiting=" in captured.out

    def test_trace_byte_stable_across_runs(self, tmp_path):
        wpath = self.workload_path(tmp_path, TWO_RECORDS + FULL_RECORD)
        outputs = []
        for i in range(2):
            tpath = tmp_path / f"t{i}.csv"
            code = main([
                "run", "--workload", wpath, "--scheduler", "rr", "--quantum", "2",
                "--allocator", "paging", "--page-size", "4", "--memory", "32",
                "--trace", str(tpath), "--metrics", str(tmp_path / f"m{i}.txt"),
            ])
            assert code == EXIT_OK
            outputs.append(tpath.read_bytes())
        assert outputs[0] == outputs[1]

    def test_unknown_scheduler_is_usage_error(self, tmp_path, capsys):
        wpath = self.workload_path(tmp_path)
        code = main([
            "run", "--workload", wpath, "--scheduler", "lottery",
            "--allocator", "first-fit",
        ])
        assert code == EXIT_USAGE

    def test_missing_parameter_is_usage_error(self, tmp_path):
        wpath = self.workload_path(tmp_path)
        code = main([
            "run", "--workload", wpath, "--scheduler", "fcfs",
            "--allocator", "paging",  # no --page-size
        ])
        assert code == EXIT_USAGE

    def test_malformed_workload_reports_line(self, tmp_path, capsys):
        wpath = self.workload_path(tmp_path, "id=1 size=1 time=0\n")
        code = main([
            "run", "--workload", wpath, "--scheduler", "fcfs",
            "--allocator", "first-fit",
        ])
        assert code == EXIT_WORKLOAD
        assert "line 1" in capsys.readouterr().err

    def test_missing_file_is_workload_error(self, tmp_path):
        code = main([
            "run", "--workload", str(tmp_path / "absent.txt"),
            "--scheduler", "fcfs", "--allocator", "first-fit",
        ])
        assert code == EXIT_WORKLOAD

    def test_unrunnable_exit_code(self, tmp_path):
        wpath = self.workload_path(tmp_path, "id=1 size=999 time=1\n")
        code = main([
            "run", "--workload", wpath, "--scheduler", "fcfs",
            "--allocator", "first-fit", "--memory", "16", "--backing", "16",
        ])
        assert code == EXIT_UNRUNNABLE

    def test_priority_scheduler_needs_priorities(self, tmp_path, capsys):
        wpath = self.workload_path(tmp_path)
        code = main([
            "run", "--workload", wpath, "--scheduler", "priority",
            "--allocator", "first-fit",
        ])
        assert code == EXIT_WORKLOAD


class TestMainOrderings:
    def test_page_table_orders(self, capsys):
        code = main([
            "orderings", "--symbols", "frames,pages,page_table",
            "--deps", "frames<page_table,pages<page_table",
        ])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines == [
            "frames,pages,page_table",
            "pages,frames,page_table",
        ]

    def test_no_deps_factorial(self, capsys):
        code = main(["orderings", "--symbols", "a,b,c"])
        assert code == EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 6

    def test_cycle_reported(self, capsys):
        code = main(["orderings", "--symbols", "a,b", "--deps", "a<b,b<a"])
        assert code == EXIT_WORKLOAD
        assert "cyclic" in capsys.readouterr().err

    def test_bad_dep_syntax_is_usage_error(self, capsys):
        code = main(["orderings", "--symbols", "a,b", "--deps", "a-b"])
        assert code == EXIT_USAGE


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == EXIT_USAGE

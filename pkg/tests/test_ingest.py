from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parem.ingest import (
    WorkspaceError,
    normalize_content_prefix,
    normalize_timestamp,
    parse_session_file,
    read_raw_records,
    scan_workspace,
)


def iso_oracle_ms(year, month, day, hour=0, minute=0, second=0):
    """Independent calendar conversion for expected values."""
    return int(
        datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc).timestamp()
        * 1000
    )


class TestNormalizeTimestamp:
    def test_iso_with_zone(self):
        expected = iso_oracle_ms(2026, 5, 1)
        assert expected == 1_777_593_600_000
        assert normalize_timestamp("2026-05-01T00:00:00Z") == expected

    def test_epoch_start(self):
        assert normalize_timestamp(0) == 0

    def test_unparseable(self):
        assert normalize_timestamp("not-a-date") is None

    def test_epoch_seconds(self):
        assert normalize_timestamp(1_700_000_000) == 1_700_000_000_000

    def test_epoch_milliseconds(self):
        assert normalize_timestamp(1_700_000_000_000) == 1_700_000_000_000

    def test_threshold_boundary(self):
        # exactly 10^11 reads as milliseconds (year 1973)
        assert normalize_timestamp(10**11) == 10**11
        # just below reads as seconds and lands beyond 2100 -> rejected
        assert normalize_timestamp(10**11 - 1) is None

    def test_numeric_string(self):
        assert normalize_timestamp("1700000000") == 1_700_000_000_000

    def test_zoneless_is_utc(self):
        assert normalize_timestamp("2026-05-01T12:30:00") == iso_oracle_ms(
            2026, 5, 1, 12, 30
        )

    def test_offset_respected(self):
        assert normalize_timestamp("2026-05-01T02:00:00+02:00") == iso_oracle_ms(
            2026, 5, 1
        )

    def test_date_only(self):
        assert normalize_timestamp("2026-05-01") == iso_oracle_ms(2026, 5, 1)

    def test_before_epoch_rejected(self):
        assert normalize_timestamp("1969-12-31T23:59:59Z") is None
        assert normalize_timestamp(-5) is None

    def test_after_2100_rejected(self):
        assert normalize_timestamp("2101-01-01T00:00:00Z") is None

    def test_none_and_bool(self):
        assert normalize_timestamp(None) is None
        assert normalize_timestamp(True) is None


def test_content_prefix_normalization():
    text = "  a\tb\n" + "c" * 200
    prefix = normalize_content_prefix(text)
    assert prefix.startswith("a b c")
    assert len(prefix) == 64
    assert normalize_content_prefix(None) == ""
    assert normalize_content_prefix([{"k": "v"}]) == '[{"k":"v"}]'


def write_lines(path: Path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestParseSessionFile:
    def test_three_valid_records(self, tmp_path):
        path = tmp_path / "s.jsonl"
        write_lines(
            path,
            [
                json.dumps({"role": "user", "content": "hi", "timestamp": 1_700_000_000}),
                json.dumps({"role": "assistant", "content": "yo"}),
                json.dumps({"type": "tool_call", "tool_name": "shell"}),
            ],
        )
        events, stats = parse_session_file(path)
        assert len(events) == 3
        assert stats.recoverable
        assert stats.total_lines == 3
        assert stats.parsed_lines == 3
        assert [e.role for e in events] == ["user", "assistant", "tool_call"]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        events, stats = parse_session_file(path)
        assert events == []
        assert not stats.recoverable

    def test_trajectory_records_with_token_counts(self, tmp_path):
        # hand-built fixture: known token totals mixed with free text
        path = tmp_path / "t.jsonl"
        write_lines(
            path,
            [
                "free text line, not a record",
                json.dumps(
                    {
                        "type": "model.completed",
                        "ts": 1_700_000_000_000,
                        "provider_route": "alpha",
                        "model": "m1",
                        "usage": {
                            "input": 100,
                            "output": 20,
                            "cache_read": 500,
                            "cache_write": 7,
                        },
                    }
                ),
                "another stray line",
                json.dumps(
                    {
                        "type": "model.completed",
                        "ts": 1_700_000_060_000,
                        "provider_route": "alpha",
                        "model": "m1",
                        "usage": {
                            "input": 50,
                            "output": 10,
                            "cache_read": 250,
                            "cache_write": 3,
                        },
                    }
                ),
            ],
        )
        events, stats = parse_session_file(path)
        assert len(events) == 2
        assert stats.total_lines == 4
        assert stats.parsed_lines == 2
        assert all(e.role == "model_completed" for e in events)
        assert sum(e.tokens.input for e in events) == 150
        assert sum(e.tokens.output for e in events) == 30
        assert sum(e.tokens.cache_read for e in events) == 750
        assert sum(e.tokens.cache_write for e in events) == 10

    def test_three_parseable_two_junk(self, tmp_path):
        path = tmp_path / "mixed.jsonl"
        write_lines(
            path,
            [
                json.dumps({"role": "user", "content": "a"}),
                '{"role": "user", "content"',
                json.dumps({"role": "user", "content": "b"}),
                "garbage ###",
                json.dumps({"role": "user", "content": "c"}),
            ],
        )
        events, stats = parse_session_file(path)
        assert stats.total_lines == 5
        assert stats.parsed_lines == 3
        assert len(events) == 3

    def test_json_without_recognized_fields_is_skipped(self, tmp_path):
        path = tmp_path / "u.jsonl"
        write_lines(path, [json.dumps({"zzz": 1}), json.dumps([1, 2, 3]), '"plain"'])
        events, stats = parse_session_file(path)
        assert events == []
        assert stats.total_lines == 3
        assert not stats.recoverable

    def test_unreadable_path_reports_truncated(self, tmp_path):
        events, stats = parse_session_file(tmp_path)  # a directory, not a file
        assert events == []
        assert stats.truncated

    def test_order_deterministic(self, tmp_path):
        path = tmp_path / "d.jsonl"
        write_lines(
            path,
            [json.dumps({"role": "user", "content": f"m{i}"}) for i in range(20)],
        )
        first, _ = parse_session_file(path)
        second, _ = parse_session_file(path)
        assert first == second
        assert [e.line_number for e in first] == list(range(1, 21))

    def test_nested_message_envelope(self, tmp_path):
        path = tmp_path / "n.jsonl"
        write_lines(
            path,
            [
                json.dumps(
                    {
                        "timestamp": "2026-05-01T00:00:00Z",
                        "message": {
                            "role": "assistant",
                            "content": "nested",
                            "model": "m9",
                            "usage": {
                                "input_tokens": 5,
                                "output_tokens": 6,
                                "cache_read_input_tokens": 7,
                                "cache_creation_input_tokens": 8,
                            },
                        },
                    }
                )
            ],
        )
        events, _ = parse_session_file(path)
        assert len(events) == 1
        event = events[0]
        assert event.role == "assistant"
        assert event.content_prefix == "nested"
        assert event.model == "m9"
        assert (event.tokens.input, event.tokens.output) == (5, 6)
        assert (event.tokens.cache_read, event.tokens.cache_write) == (7, 8)

    def test_model_completed_without_usage_gets_zero_tokens(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_lines(path, [json.dumps({"type": "model.completed"})])
        events, _ = parse_session_file(path)
        assert events[0].tokens is not None
        assert events[0].tokens.total() == 0

    def test_unparseable_timestamp_keeps_event(self, tmp_path):
        path = tmp_path / "b.jsonl"
        write_lines(path, [json.dumps({"role": "user", "timestamp": "someday"})])
        events, _ = parse_session_file(path)
        assert len(events) == 1
        assert events[0].timestamp_ms is None

    def test_invalid_utf8_lines_tolerated(self, tmp_path):
        path = tmp_path / "bin.jsonl"
        path.write_bytes(
            b"\xff\xfe binary noise \x00\n"
            + json.dumps({"role": "user", "content": "survived"}).encode()
            + b"\n\x80\x81\x82\n"
        )
        events, stats = parse_session_file(path)
        assert len(events) == 1
        assert events[0].content_prefix == "survived"
        assert stats.total_lines == 3
        assert stats.recoverable
        assert not stats.truncated

    def test_role_and_type_both_present(self, tmp_path):
        path = tmp_path / "rt.jsonl"
        write_lines(path, [json.dumps({"type": "message", "role": "user", "content": "x"})])
        events, _ = parse_session_file(path)
        assert events[0].role == "user"
        assert events[0].event_type == "message"


@given(
    st.lists(
        st.one_of(
            st.sampled_from(
                [
                    "not json at all",
                    '{"cut": ',
                    '{"zzz": 1}',
                    "[1, 2]",
                ]
            ),
            st.integers(min_value=0, max_value=999).map(
                lambda i: json.dumps({"role": "user", "content": f"v{i}"})
            ),
        ),
        max_size=30,
    )
)
@settings(max_examples=60)
def test_recoverable_iff_one_line_parsed(tmp_path_factory, lines):
    path = tmp_path_factory.mktemp("mix") / "f.jsonl"
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    events, stats = parse_session_file(path)
    valid = sum(1 for line in lines if '"role"' in line)
    assert stats.parsed_lines == valid
    assert len(events) == stats.parsed_lines
    assert stats.recoverable == (valid >= 1)
    assert stats.total_lines == len([line for line in lines if line.strip()])


def test_raw_record_per_nonempty_line(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text('{"role": "user"}\n\n   \nplain text\n', encoding="utf-8")
    records = list(read_raw_records(path))
    assert [r.line_number for r in records] == [1, 4]
    assert isinstance(records[0].payload, dict)
    assert records[1].payload == "plain text"


class TestScanWorkspace:
    def test_empty_directory(self, tmp_path):
        inventory = scan_workspace(tmp_path)
        assert inventory.memory_files == 0
        assert inventory.agent_dirs == 0
        assert inventory.skill_files == 0
        assert inventory.session_files_main == 0
        assert inventory.recoverable_main == 0
        assert inventory.surfaces.asb == 0

    def test_fixture_counts(self, tmp_path):
        # 5 memory files, 2 agent dirs, 3 skill files
        for i in range(5):
            write_lines(tmp_path / "memory" / f"2026-02-0{i + 1}.md", ["note"])
        for i in range(2):
            (tmp_path / "agents" / f"agent-{i}").mkdir(parents=True)
        for i in range(3):
            write_lines(tmp_path / "skills" / f"s{i}" / "SKILL.md", ["skill"])
        inventory = scan_workspace(tmp_path)
        assert inventory.memory_files == 5
        assert inventory.agent_dirs == 2
        assert inventory.skill_files == 3

    def test_nested_memory_and_skill_files_counted(self, tmp_path):
        write_lines(tmp_path / "memory" / "archive" / "2026-01-05.md", ["note"])
        write_lines(tmp_path / "memory" / "2026-01-06.md", ["note"])
        write_lines(tmp_path / "MEMORY.md", ["index"])
        write_lines(tmp_path / "skills" / "deep" / "nested" / "SKILL.md", ["skill"])
        inventory = scan_workspace(tmp_path)
        assert inventory.memory_files == 3
        assert inventory.skill_files == 1

    def test_session_file_with_junk_is_recoverable(self, tmp_path):
        write_lines(
            tmp_path / "sessions" / "a.jsonl",
            [
                json.dumps({"role": "user", "content": "x"}),
                "junk 1",
                json.dumps({"role": "user", "content": "y"}),
                "junk 2",
                json.dumps({"role": "user", "content": "z"}),
            ],
        )
        inventory = scan_workspace(tmp_path)
        assert inventory.session_files_main == 1
        assert inventory.recoverable_main == 1

    def test_junk_only_session_file_counted_unrecoverable(self, tmp_path):
        write_lines(tmp_path / "sessions" / "bad.log", ["junk", "more junk"])
        inventory = scan_workspace(tmp_path)
        assert inventory.session_files_main == 1
        assert inventory.recoverable_main == 0

    def test_agent_sessions_scoped(self, tmp_path):
        write_lines(
            tmp_path / "sessions" / "main.jsonl",
            [json.dumps({"role": "user", "content": "main"})],
        )
        write_lines(
            tmp_path / "agents" / "helper" / "sessions" / "h.jsonl",
            [json.dumps({"role": "assistant", "content": "agent"})],
        )
        inventory = scan_workspace(tmp_path)
        assert inventory.session_files_main == 1
        assert inventory.session_files_all == 2
        assert inventory.recoverable_all == 2

    def test_surface_counts_from_artifacts(self, tmp_path):
        write_lines(tmp_path / "manuscripts" / "draft.md", ["text"])
        write_lines(tmp_path / "scripts" / "tool.py", ["pass"])
        write_lines(tmp_path / "stray.txt", ["unmatched"])
        inventory = scan_workspace(tmp_path)
        assert inventory.surfaces.counts["manuscripts"] == 1
        assert inventory.surfaces.counts["scripts"] == 1
        assert inventory.surfaces.counts["unclassified"] == 1
        assert inventory.surfaces.asb == 2

    def test_missing_root_is_fatal(self, tmp_path):
        with pytest.raises(WorkspaceError):
            scan_workspace(tmp_path / "nope")

    def test_deterministic(self, tmp_path):
        write_lines(
            tmp_path / "sessions" / "a.jsonl",
            [json.dumps({"role": "user", "content": "x"})],
        )
        write_lines(tmp_path / "memory" / "2026-01-01.md", ["note"])
        assert scan_workspace(tmp_path) == scan_workspace(tmp_path)

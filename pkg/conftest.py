import json

import pytest

from topickit.models.schemas import RegexDocument


def make_doc(**overrides) -> dict:
    doc = {
        "topic": "covid19",
        "language": "en",
        "tier": "tier2",
        "version": 1,
        "sections": [
            {
                "label": "core",
                "clauses": [
                    {"kind": "keyword", "core": "c[o0]vi[dt]"},
                    {"kind": "literal", "pattern": "coronavirus"},
                ],
            },
            {
                "label": "weak",
                "clauses": [
                    {"kind": "bipartite", "set_a": ["virus"], "set_b": ["cases", "outbreak"], "max_gap": 20},
                ],
            },
        ],
        "tests": {
            "must_match": ["covid cases rise", "new coronavirus strain", "virus outbreak in town"],
            "must_not_match": ["corona beer", "computer virus"],
        },
    }
    doc.update(overrides)
    return doc


@pytest.fixture
def covid_dict() -> dict:
    return make_doc()


@pytest.fixture
def covid_doc(covid_dict) -> RegexDocument:
    return RegexDocument.model_validate(covid_dict)


@pytest.fixture
def covid_doc_file(tmp_path, covid_dict):
    path = tmp_path / "covid_en.json"
    path.write_text(json.dumps(covid_dict), encoding="utf-8")
    return path


@pytest.fixture
def registry_path(tmp_path, monkeypatch):
    path = tmp_path / "registry.json"
    monkeypatch.setenv("TOPICKIT_REGISTRY", str(path))
    return path


@pytest.fixture
def write_tsv(tmp_path):
    def write(name: str, rows) -> str:
        path = tmp_path / name
        lines = ["\t".join(str(cell) for cell in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def write_txt(tmp_path):
    def write(name: str, lines) -> str:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)
    return write

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reviver.domain import CollectionManifest, MemoryTree
from reviver.gateway import FixtureAnnotations, ModelGateway, load_annotations
from reviver.persistence import load_manifest, load_tree
from reviver.service import MOCK_BUILT_AT
from reviver.tree_builder import build_memory_tree

from support import mock_gateway

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def trip_manifest() -> CollectionManifest:
    return load_manifest(FIXTURES / "collections" / "trip" / "manifest.json")


@pytest.fixture
def trip_annotations() -> FixtureAnnotations:
    return load_annotations(FIXTURES / "collections" / "trip" / "manifest.annotations.json")


@pytest.fixture
def trip_gateway(trip_annotations) -> ModelGateway:
    return mock_gateway(trip_annotations)


@pytest.fixture
def trip_tree(trip_manifest, trip_gateway) -> MemoryTree:
    return build_memory_tree(trip_manifest, trip_gateway, built_at=MOCK_BUILT_AT)


@pytest.fixture
def contrast_manifest() -> CollectionManifest:
    return load_manifest(FIXTURES / "collections" / "contrast" / "manifest.json")


@pytest.fixture
def contrast_annotations() -> FixtureAnnotations:
    return load_annotations(FIXTURES / "collections" / "contrast" / "manifest.annotations.json")


@pytest.fixture
def contrast_gateway(contrast_annotations) -> ModelGateway:
    return mock_gateway(contrast_annotations)


@pytest.fixture
def contrast_tree(contrast_manifest, contrast_gateway) -> MemoryTree:
    return build_memory_tree(contrast_manifest, contrast_gateway, built_at=MOCK_BUILT_AT)


@pytest.fixture
def single_manifest() -> CollectionManifest:
    return load_manifest(FIXTURES / "collections" / "single" / "manifest.json")


@pytest.fixture
def single_annotations() -> FixtureAnnotations:
    return load_annotations(FIXTURES / "collections" / "single" / "manifest.annotations.json")


@pytest.fixture
def two_scene_tree() -> MemoryTree:
    return load_tree(FIXTURES / "trees" / "two_scene.json")


@pytest.fixture
def three_scene_tree() -> MemoryTree:
    return load_tree(FIXTURES / "trees" / "three_scene.json")


@pytest.fixture
def five_scene_tree() -> MemoryTree:
    return load_tree(FIXTURES / "trees" / "five_scene.json")


@pytest.fixture
def hand_trees(two_scene_tree, three_scene_tree, five_scene_tree) -> list[MemoryTree]:
    return [two_scene_tree, three_scene_tree, five_scene_tree]

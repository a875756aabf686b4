"""Batched domain-membership queries with a content-addressed cache."""

import pytest

from trialtables.corpus.pubmed import FixtureClient, make_batches, partition_by_domain
from trialtables.errors import BatchQueryError, TransportError

PMIDS = [str(i) for i in range(100, 145)]


class FlakyClient:
    """Fails on a chosen batch, counts calls otherwise."""

    def __init__(self, matches, fail_on=None):
        self.matches = set(matches)
        self.fail_on = fail_on or set()
        self.calls = 0

    def query(self, term, pmids):
        self.calls += 1
        if any(p in self.fail_on for p in pmids):
            raise ConnectionError("boom")
        return self.matches & set(pmids)


def test_batches_are_contiguous_and_balanced():
    batches = make_batches(PMIDS)
    assert len(batches) == 10
    assert [p for b in batches for p in b] == PMIDS
    sizes = {len(b) for b in batches}
    assert max(sizes) - min(sizes) <= 1


def test_fewer_ids_than_batches():
    batches = make_batches(["1", "2"])
    assert [p for b in batches for p in b] == ["1", "2"]
    assert all(b for b in batches)


def test_partition_matches_fixture():
    client = FixtureClient({"glaucoma": ["101", "120"]})
    found = partition_by_domain(PMIDS, "glaucoma", client=client)
    assert found == {"101", "120"}


def test_empty_pmids_short_circuits():
    assert partition_by_domain([], "glaucoma") == set()


def test_no_client_and_no_cache_is_transport_error():
    with pytest.raises(TransportError):
        partition_by_domain(PMIDS, "glaucoma")


def test_cache_answers_repeat_queries(tmp_path):
    client = FlakyClient(matches={"101"})
    first = partition_by_domain(PMIDS, "glaucoma", client=client, cache_dir=tmp_path)
    calls_after_first = client.calls
    second = partition_by_domain(PMIDS, "glaucoma", client=client, cache_dir=tmp_path)
    assert first == second == {"101"}
    assert client.calls == calls_after_first


def test_cache_alone_can_answer(tmp_path):
    client = FlakyClient(matches={"101"})
    partition_by_domain(PMIDS, "glaucoma", client=client, cache_dir=tmp_path)
    found = partition_by_domain(PMIDS, "glaucoma", client=None, cache_dir=tmp_path)
    assert found == {"101"}


def test_cache_is_term_specific(tmp_path):
    client = FlakyClient(matches={"101"})
    partition_by_domain(PMIDS, "glaucoma", client=client, cache_dir=tmp_path)
    with pytest.raises(BatchQueryError):
        partition_by_domain(PMIDS, "diabetes", client=None, cache_dir=tmp_path)


def test_failed_batches_surface_as_batch_error(tmp_path):
    client = FlakyClient(matches={"101"}, fail_on={"120"})
    with pytest.raises(BatchQueryError) as err:
        partition_by_domain(PMIDS, "glaucoma", client=client, cache_dir=tmp_path)
    assert err.value.failed_batches
    assert isinstance(err.value, TransportError)


def test_recovery_after_partial_failure_uses_cache(tmp_path):
    flaky = FlakyClient(matches={"101", "120"}, fail_on={"120"})
    with pytest.raises(BatchQueryError):
        partition_by_domain(PMIDS, "glaucoma", client=flaky, cache_dir=tmp_path)
    healthy = FlakyClient(matches={"101", "120"})
    found = partition_by_domain(PMIDS, "glaucoma", client=healthy, cache_dir=tmp_path)
    assert found == {"101", "120"}
    # only the previously failed batches hit the network
    assert healthy.calls < 10

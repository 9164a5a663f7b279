import pytest

from nqa_engine.infrastructure.executors.process_pool_executor import (
    InlineModeExecutor,
    ProcessPoolModeExecutor,
    create_mode_executor,
)


@pytest.mark.asyncio
async def test_inline_executor_keeps_job_order():
    executor = InlineModeExecutor()

    results = await executor.map(pow, [(2, 3), (3, 2), (5, 0)])

    assert results == [8, 9, 1]


@pytest.mark.asyncio
async def test_process_pool_returns_results_in_job_order():
    # 1. ARRANGE
    executor = ProcessPoolModeExecutor(2)

    # 2. ACT
    try:
        results = await executor.map(pow, [(2, n) for n in range(10)])
    finally:
        executor.close()

    # 3. ASSERT
    assert results == [2**n for n in range(10)]


def test_executor_factory():
    assert isinstance(create_mode_executor(1), InlineModeExecutor)
    pool = create_mode_executor(3)
    assert isinstance(pool, ProcessPoolModeExecutor)
    assert pool.workers == 3
    pool.close()
    with pytest.raises(ValueError):
        create_mode_executor(0)

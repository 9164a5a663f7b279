from .process_pool_executor import InlineModeExecutor, ProcessPoolModeExecutor, create_mode_executor

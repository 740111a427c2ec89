/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    alpha_curve(steps: number): string;
    constructor(n_points: number, noise: number, pool_size: number, seed: bigint);
    points(): string;
    pool(): string;
    select(alpha: number): string;
    selection_grid(resolution: number): Int8Array;
    /**
     * `mode` is one of `alpha_qboost`, `qboost_lambda` or `adaboost`.
     */
    train(mode: string, target_size: number, resolution: number): string;
}

export function compare_solvers(n_vars: number, seed: bigint, num_reads: number, sweeps: number): string;

export function version(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly compare_solvers: (a: number, b: bigint, c: number, d: number) => [number, number, number, number];
    readonly demo_alpha_curve: (a: number, b: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly demo_points: (a: number) => [number, number, number, number];
    readonly demo_pool: (a: number) => [number, number, number, number];
    readonly demo_select: (a: number, b: number) => [number, number, number, number];
    readonly demo_selection_grid: (a: number, b: number) => [number, number, number, number];
    readonly demo_train: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly version: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

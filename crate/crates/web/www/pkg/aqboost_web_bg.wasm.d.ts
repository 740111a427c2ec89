/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const compare_solvers: (a: number, b: bigint, c: number, d: number) => [number, number, number, number];
export const demo_alpha_curve: (a: number, b: number) => [number, number, number, number];
export const demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const demo_points: (a: number) => [number, number, number, number];
export const demo_pool: (a: number) => [number, number, number, number];
export const demo_select: (a: number, b: number) => [number, number, number, number];
export const demo_selection_grid: (a: number, b: number) => [number, number, number, number];
export const demo_train: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const version: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

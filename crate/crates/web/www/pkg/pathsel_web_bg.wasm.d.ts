/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demooutput_free: (a: number, b: number) => void;
export const demooutput_summary: (a: number) => [number, number];
export const demooutput_svg: (a: number) => [number, number];
export const deviation_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const fringe: (a: number, b: number, c: bigint) => [number, number, number];
export const pulse_overlay: (a: number, b: number, c: bigint) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;

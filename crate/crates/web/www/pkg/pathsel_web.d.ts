/* tslint:disable */
/* eslint-disable */

export class DemoOutput {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly summary: string;
    readonly svg: string;
}

/**
 * Maximum phase deviation versus pulse separation for one repetition rate.
 */
export function deviation_curve(rate_ghz: number, awg_ghz: number, n_traces: number, seed: bigint): DemoOutput;

/**
 * Fringe scan of the gain-switched source at a minimum drive current.
 */
export function fringe(i_min_ma: number, n_pulses: number, seed: bigint): DemoOutput;

/**
 * Every received pulse of one simulated trace, overlaid and grouped by its
 * nominal phase.
 */
export function pulse_overlay(rate_ghz: number, awg_ghz: number, seed: bigint): DemoOutput;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demooutput_free: (a: number, b: number) => void;
    readonly demooutput_summary: (a: number) => [number, number];
    readonly demooutput_svg: (a: number) => [number, number];
    readonly deviation_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly fringe: (a: number, b: number, c: bigint) => [number, number, number];
    readonly pulse_overlay: (a: number, b: number, c: bigint) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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

// 1 Hz blink driver for active service reminders.
// The server only says "blink: true"; the cadence is a presentation concern.

export const BLINK_PERIOD_MS = 1000;

type TimerHandle = ReturnType<typeof setInterval>;

export class BlinkDriver {
  private readonly apply: (visible: boolean) => void;
  private timer: TimerHandle | null = null;
  private visible = true;

  constructor(apply: (visible: boolean) => void) {
    this.apply = apply;
    this.apply(true);
  }

  /** Start or stop blinking; turning it off snaps the content back on. */
  setBlinking(on: boolean): void {
    if (on && this.timer === null) {
      this.timer = setInterval(() => {
        this.visible = !this.visible;
        this.apply(this.visible);
      }, BLINK_PERIOD_MS / 2);
    } else if (!on && this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
      this.visible = true;
      this.apply(true);
    }
  }

  stop(): void {
    this.setBlinking(false);
  }
}

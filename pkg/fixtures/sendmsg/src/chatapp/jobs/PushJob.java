package chatapp.jobs;

import chatapp.msg.Processor;
import chatapp.ui.TextBox;

public class PushJob {
    TextBox box;
    Processor processor;

    public PushJob(TextBox box, Processor processor) {
        this.box = box;
        this.processor = processor;
    }

    public void deliver() {
        String text = this.box.getText();
        this.processor.handleMessage(text, 7L);
    }
}
